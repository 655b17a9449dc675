#include "imgstat/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "imgstat/error.hpp"
#include "imgstat/format.hpp"

namespace imgstat {

namespace {

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw Error(ErrorCode::BadEdges, "need at least two edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw Error(ErrorCode::BadEdges, "edges must be strictly increasing");
    }
  }
}

std::vector<double> normalized(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  std::vector<double> out(v.begin(), v.end());
  if (sum > 0.0) {
    for (double& x : out) x /= sum;
  }
  return out;
}

}  // namespace

std::vector<double> Histogram::density() const {
  if (!(total > 0.0)) return {};
  std::vector<double> d(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) d[i] = counts[i] / total;
  return d;
}

MomentSummary moment_summary(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorCode::DegenerateSample, "need at least two samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw Error(ErrorCode::DegenerateSample, "constant sample");

  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (!(m2 > 0.0)) throw Error(ErrorCode::DegenerateSample, "zero variance");

  MomentSummary s;
  s.mean = mean;
  s.std = std::sqrt(m2);
  s.skewness = m3 / (m2 * s.std);
  s.kurtosis = m4 / (m2 * m2);
  return s;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(lo < hi)) throw Error(ErrorCode::BadEdges, "bad uniform edge range");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  e.back() = hi;
  return e;
}

Histogram build_histogram(std::span<const double> samples, std::span<const double> edges) {
  check_edges(edges);
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0.0);
  const double lo = edges.front();
  const double hi = edges.back();
  std::size_t in_range = 0;
  for (double x : samples) {
    if (x < lo) {
      ++h.underflow;
    } else if (x > hi || std::isnan(x)) {
      ++h.overflow;
    } else {
      auto it = std::upper_bound(edges.begin(), edges.end(), x);
      std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      if (bin >= h.counts.size()) bin = h.counts.size() - 1;  // x == hi
      h.counts[bin] += 1.0;
      ++in_range;
    }
  }
  h.total = static_cast<double>(in_range);
  return h;
}

Histogram average_histograms(std::span<const Histogram> list) {
  if (list.empty()) throw Error(ErrorCode::EmptyList, "no histograms to average");
  const auto& edges = list.front().edges;
  for (const auto& h : list) {
    if (h.edges != edges) throw Error(ErrorCode::MismatchedEdges, "histogram edges differ");
  }
  Histogram out;
  out.edges = edges;
  out.counts.assign(edges.size() - 1, 0.0);
  std::size_t used = 0;
  for (const auto& h : list) {
    if (!(h.total > 0.0)) continue;
    for (std::size_t i = 0; i < h.counts.size(); ++i) out.counts[i] += h.counts[i] / h.total;
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::EmptyList, "every histogram is empty");
  out.total = 0.0;
  for (double& c : out.counts) {
    c /= static_cast<double>(used);
    out.total += c;
  }
  return out;
}

double kl_divergence(std::span<const double> p_raw, std::span<const double> q_raw) {
  if (p_raw.size() != q_raw.size()) {
    throw Error(ErrorCode::MismatchedEdges, "densities have different bin counts");
  }
  const auto p = normalized(p_raw);
  std::vector<double> q(q_raw.begin(), q_raw.end());
  for (double& x : q) x = std::max(x, kKlEpsilon);
  q = normalized(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double kl_divergence(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges) throw Error(ErrorCode::MismatchedEdges, "histogram edges differ");
  return kl_divergence(p.counts, q.counts);
}

void to_json(nlohmann::json& j, const Histogram& h) {
  j = nlohmann::json{{"edges", h.edges},         {"counts", h.counts},
                     {"total", h.total},         {"underflow", h.underflow},
                     {"overflow", h.overflow}};
}

void from_json(const nlohmann::json& j, Histogram& h) {
  h.edges = j.at("edges").get<std::vector<double>>();
  h.counts = j.at("counts").get<std::vector<double>>();
  h.total = j.at("total").get<double>();
  h.underflow = j.at("underflow").get<std::size_t>();
  h.overflow = j.at("overflow").get<std::size_t>();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream os;
  os << "edge_low,edge_high,density\n";
  const auto d = h.density();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
       << format_double(d.empty() ? 0.0 : d[i]) << '\n';
  }
  return os.str();
}

}  // namespace imgstat
