#include "imgstat/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "imgstat/error.hpp"

namespace imgstat {

LevelImage quantize_gray(const GrayImage& gray) {
  LevelImage out(gray.width(), gray.height());
  auto src = gray.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::floor(src[i] + 0.5), 0.0, 255.0));
  }
  return out;
}

ThresholdSeries quantile_thresholds(const LevelImage& gray, std::size_t n_levels) {
  if (n_levels < 2) throw Error(ErrorCode::BadConfig, "need at least two gray-level bands");
  std::array<std::uint64_t, 256> hist{};
  int max_level = 0;
  for (std::uint8_t v : gray.values()) {
    ++hist[v];
    max_level = std::max<int>(max_level, v);
  }
  // below[t] = number of pixels with value < t, t in [0, 256]
  std::array<std::uint64_t, 257> below{};
  for (int t = 1; t <= 256; ++t) below[t] = below[t - 1] + hist[t - 1];

  const std::uint64_t hw = gray.size();
  const std::uint64_t n_bands = n_levels;
  ThresholdSeries series;
  series.n_levels = n_levels;
  series.thresholds.reserve(n_levels);
  int t = 0;
  for (std::uint64_t n = 1; n <= n_bands; ++n) {
    // below[t] * N > n * HW  <=>  more than n*HW/N pixels below t
    while (t <= 256 && !(below[t] * n_bands > n * hw)) ++t;
    series.thresholds.push_back(t <= 256 ? t : max_level + 1);
  }
  for (int& th : series.thresholds) th = std::min(th, max_level + 1);
  return series;
}

Raster<std::uint16_t> band_map(const LevelImage& gray, const ThresholdSeries& thresholds) {
  const auto& ts = thresholds.thresholds;
  if (ts.empty() || !std::is_sorted(ts.begin(), ts.end())) {
    throw Error(ErrorCode::BadConfig, "threshold series must be nonempty and nondecreasing");
  }
  std::array<std::uint16_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    // first n with v < t_n; values at or above t_N join the top band
    auto it = std::upper_bound(ts.begin(), ts.end(), v);
    lut[static_cast<std::size_t>(v)] =
        static_cast<std::uint16_t>(it == ts.end() ? ts.size() - 1 : it - ts.begin());
  }
  Raster<std::uint16_t> out(gray.width(), gray.height());
  auto src = gray.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

AreaHistogram segment_and_count(const LevelImage& gray, const ThresholdSeries& thresholds,
                                Connectivity connectivity) {
  const auto bands = band_map(gray, thresholds);
  const std::size_t w = bands.width();
  const std::size_t h = bands.height();
  const bool eight = connectivity == Connectivity::Eight;

  // Pass 1: every pixel starts as its own set; merge with already-visited
  // neighbours in the same band.
  UnionFind uf(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto idx = static_cast<std::uint32_t>(y * w + x);
      const auto band = bands(y, x);
      if (x > 0 && bands(y, x - 1) == band) uf.unite(idx, idx - 1);
      if (y > 0) {
        const auto up = static_cast<std::uint32_t>(idx - w);
        if (bands(y - 1, x) == band) uf.unite(idx, up);
        if (eight) {
          if (x > 0 && bands(y - 1, x - 1) == band) uf.unite(idx, up - 1);
          if (x + 1 < w && bands(y - 1, x + 1) == band) uf.unite(idx, up + 1);
        }
      }
    }
  }

  // Pass 2: resolve roots and accumulate areas.
  std::vector<std::uint32_t> area(w * h, 0);
  for (std::uint32_t i = 0; i < w * h; ++i) ++area[uf.find(i)];
  AreaHistogram hist;
  for (std::uint32_t a : area) {
    if (a > 0) ++hist[a];
  }
  return hist;
}

RegionLawFit fit_region_law(const AreaHistogram& hist, std::size_t s_max) {
  std::vector<std::pair<std::size_t, std::size_t>> occupied;
  std::size_t lattice = 0;
  double n = 0.0, sum_log = 0.0;
  for (const auto& [s, count] : hist) {
    if (s == 0 || s >= s_max || count == 0) continue;
    occupied.emplace_back(s, count);
    lattice = std::gcd(lattice, s);
    n += static_cast<double>(count);
    sum_log += static_cast<double>(count) * std::log(static_cast<double>(s));
  }
  if (occupied.size() < 2) {
    throw Error(ErrorCode::InsufficientSupport, "need at least two distinct region sizes below s_max");
  }
  const double target = sum_log / n;

  std::vector<double> log_sizes;
  for (std::size_t s = lattice; s < s_max; s += lattice) log_sizes.push_back(std::log(static_cast<double>(s)));

  // E_c[ln s] and Var_c[ln s] under P(s) proportional to s^c on the lattice.
  auto moments = [&](double c) {
    const double shift = c > 0 ? c * log_sizes.back() : c * log_sizes.front();
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (double ls : log_sizes) {
      const double p = std::exp(c * ls - shift);
      z += p;
      m1 += p * ls;
      m2 += p * ls * ls;
    }
    m1 /= z;
    m2 /= z;
    return std::array<double, 3>{m1, m2 - m1 * m1, std::log(z) + shift};
  };

  double lo = -60.0, hi = 60.0;
  double c = -2.0;
  for (int it = 0; it < 200; ++it) {
    const auto m = moments(c);
    const double f = m[0] - target;  // increasing in c
    if (f > 0.0) {
      hi = c;
    } else {
      lo = c;
    }
    double next = m[1] > 0.0 ? c - f / m[1] : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - c) < 1e-13 * std::max(1.0, std::abs(c))) {
      c = next;
      break;
    }
    c = next;
  }

  RegionLawFit fit;
  fit.c = c;
  fit.lattice = lattice;
  const double log_z = moments(c)[2];
  const double log_k = std::log(n) - log_z;
  fit.K = std::exp(log_k);
  double res = 0.0;
  for (const auto& [s, count] : occupied) {
    const double d = std::log(static_cast<double>(count)) - (log_k + c * std::log(static_cast<double>(s)));
    res += d * d;
  }
  fit.residual = res / static_cast<double>(occupied.size());
  return fit;
}

}  // namespace imgstat
