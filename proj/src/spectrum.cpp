#include "imgstat/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#include "imgstat/error.hpp"
#include "imgstat/format.hpp"
#include "imgstat/random.hpp"

namespace imgstat {

namespace {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// FFTW planning is not thread-safe; execution of an existing plan on new
// (equally aligned) arrays is. Plans live for the process lifetime.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(std::size_t n) { return get(n, true); }
  fftw_plan backward(std::size_t n) { return get(n, false); }

 private:
  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mutex_);
    auto& slot = forward ? forward_[n] : backward_[n];
    if (!slot) {
      const int ni = static_cast<int>(n);
      auto in = fftw_buffer<double>(n * n);
      auto out = fftw_buffer<fftw_complex>(n * (n / 2 + 1));
      slot = forward ? fftw_plan_dft_r2c_2d(ni, ni, in.get(), out.get(), FFTW_ESTIMATE)
                     : fftw_plan_dft_c2r_2d(ni, ni, out.get(), in.get(), FFTW_ESTIMATE);
    }
    return slot;
  }

  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> forward_;
  std::map<std::size_t, fftw_plan> backward_;
};

std::size_t wrap(long k, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((k % m) + m) % m);
}

Spectrum1D make_axis(std::size_t size) {
  Spectrum1D s;
  for (std::size_t k = 1; k <= size / 2; ++k) s.freqs.push_back(static_cast<double>(k) / static_cast<double>(size));
  s.power.assign(s.freqs.size(), 0.0);
  return s;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::string to_string(AxisProfile p) { return p == AxisProfile::Slice ? "slice" : "marginal"; }

AxisProfile axis_profile_from_string(const std::string& s) {
  if (s == "slice") return AxisProfile::Slice;
  if (s == "marginal") return AxisProfile::Marginal;
  throw Error(ErrorCode::BadConfig, "unknown axis profile '" + s + "'");
}

double SpectrumGrid::at_frequency(long ky, long kx) const {
  const long half = static_cast<long>(size / 2);
  return at(wrap(ky + half, size), wrap(kx + half, size));
}

SpectrumGrid power_spectrum(const GrayImage& gray) {
  if (gray.width() != gray.height()) {
    throw Error(ErrorCode::NonSquareImage, "power spectrum needs a square image");
  }
  const std::size_t n = gray.width();
  const std::size_t half_cols = n / 2 + 1;
  auto src = gray.values();
  const double mean = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(src.size());

  auto in = fftw_buffer<double>(n * n);
  auto out = fftw_buffer<fftw_complex>(n * half_cols);
  for (std::size_t i = 0; i < src.size(); ++i) in[i] = src[i] - mean;
  fftw_execute_dft_r2c(PlanCache::instance().forward(n), in.get(), out.get());

  SpectrumGrid grid;
  grid.size = n;
  grid.power.assign(n * n, 0.0);
  const std::size_t shift = n / 2;
  for (std::size_t ky = 0; ky < n; ++ky) {
    for (std::size_t kx = 0; kx < n; ++kx) {
      const fftw_complex* c;
      if (kx < half_cols) {
        c = &out[ky * half_cols + kx];
      } else {
        // Hermitian symmetry: F(ky, kx) = conj(F(-ky, -kx)).
        c = &out[((n - ky) % n) * half_cols + (n - kx)];
      }
      const double p = (*c)[0] * (*c)[0] + (*c)[1] * (*c)[1];
      grid.power[((ky + shift) % n) * n + (kx + shift) % n] = p;
    }
  }
  return grid;
}

Spectrum1D axis_average(const SpectrumGrid& grid, SpectrumAxis axis, AxisProfile profile) {
  Spectrum1D s = make_axis(grid.size);
  const long n = static_cast<long>(grid.size);
  for (std::size_t i = 0; i < s.freqs.size(); ++i) {
    const long k = static_cast<long>(i + 1);
    if (profile == AxisProfile::Slice) {
      s.power[i] = axis == SpectrumAxis::Horizontal ? grid.at_frequency(0, k) : grid.at_frequency(k, 0);
    } else {
      double acc = 0.0;
      for (long o = -n / 2; o < n - n / 2; ++o) {
        acc += axis == SpectrumAxis::Horizontal ? grid.at_frequency(o, k) : grid.at_frequency(k, o);
      }
      s.power[i] = acc / static_cast<double>(n);
    }
  }
  return s;
}

PowerLawFit fit_power_law(const Spectrum1D& spec, double f_min, double f_max) {
  constexpr double kTol = 1e-12;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
    const double f = spec.freqs[i];
    if (f >= f_min - kTol && f <= f_max + kTol && spec.power[i] > 0.0) {
      xs.push_back(std::log(f));
      ys.push_back(std::log(spec.power[i]));
    }
  }
  if (xs.size() < 8) {
    throw Error(ErrorCode::InsufficientSupport, "power-law fit needs at least 8 positive samples in band");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = ys[i] - (intercept + slope * xs[i]);
    res += d * d;
  }
  PowerLawFit fit;
  fit.alpha = -slope;
  fit.log_A = intercept;
  fit.residual = res / n;
  fit.n_points = xs.size();
  return fit;
}

PowerLawFit fit_power_law(const Spectrum1D& spec) {
  if (spec.freqs.empty()) throw Error(ErrorCode::InsufficientSupport, "empty spectrum");
  const double size = std::round(1.0 / spec.freqs.front());
  return fit_power_law(spec, 2.0 / size, 0.5 - 2.0 / size);
}

SpikeReport detect_spikes(const Spectrum1D& spec, double base_freq, double threshold_db,
                          std::size_t window) {
  SpikeReport report;
  report.base_freq = base_freq;
  report.threshold_db = threshold_db;
  const std::size_t n = spec.freqs.size();
  if (n == 0) return report;

  // The grid is k / size; base_freq must be a whole number of bins.
  const double df = spec.freqs.front();
  const double base_bins = base_freq / df;
  if (!(base_freq > 0.0) || std::abs(base_bins - std::round(base_bins)) > 1e-9 * std::max(1.0, base_bins)) {
    throw Error(ErrorCode::BaseFreqOffGrid, "spike base frequency is not on the frequency grid");
  }
  const auto base_step = static_cast<std::size_t>(std::llround(base_bins));

  const double peak = *std::max_element(spec.power.begin(), spec.power.end());
  if (!(peak > 0.0)) return report;
  const double floor = peak * 1e-20;

  // The profile continues past Nyquist as its mirror image; below the first
  // bin there is only DC, so windows shrink symmetrically there instead.
  const bool nyquist = std::abs(spec.freqs.back() - 0.5) < 1e-12;
  auto db_at = [&](long i) {
    if (i >= static_cast<long>(n)) i = nyquist ? 2 * static_cast<long>(n) - 2 - i : static_cast<long>(n) - 1;
    return 10.0 * std::log10(std::max(spec.power[static_cast<std::size_t>(i)], floor));
  };

  const long half = static_cast<long>(std::max<std::size_t>(window, 1) / 2);
  std::vector<double> excess(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long li = static_cast<long>(i);
    const long h = std::min(half, li);
    std::vector<double> vals;
    for (long j = li - h; j <= li + h; ++j) vals.push_back(db_at(j));
    excess[i] = db_at(li) - median_of(std::move(vals));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const long li = static_cast<long>(i);
    const double here = db_at(li);
    const bool left_ok = i == 0 || here >= db_at(li - 1);
    const bool right_ok = (i + 1 == n && !nyquist) || here >= db_at(li + 1);
    if (excess[i] >= threshold_db && left_ok && right_ok) {
      report.spike_freqs.push_back(spec.freqs[i]);
      report.prominences.push_back(excess[i]);
    }
  }

  double best = 0.0;
  bool any = false;
  for (std::size_t k = base_step; k >= 1 && k <= n; k += base_step) {
    const double e = excess[k - 1];
    if (!any || e > best) best = e;
    any = true;
  }
  report.spikiness = any ? best : 0.0;
  return report;
}

GrayImage impulse_pattern(std::size_t size, std::size_t layers, std::span<const double> amplitudes) {
  if (layers < 2) throw Error(ErrorCode::BadConfig, "impulse pattern needs at least two layers");
  if (amplitudes.size() != layers - 1) {
    throw Error(ErrorCode::BadConfig, "impulse pattern needs layers-1 amplitudes");
  }
  if (layers - 1 >= 63 || (std::size_t{1} << (layers - 1)) > size) {
    throw Error(ErrorCode::PeriodExceedsImage, "largest impulse period exceeds the image");
  }
  GrayImage out(size, size, 0.0);
  for (std::size_t k = 1; k < layers; ++k) {
    const std::size_t period = std::size_t{1} << k;
    const double a = amplitudes[k - 1];
    for (std::size_t y = 0; y < size; y += period) {
      for (std::size_t x = 0; x < size; x += period) out(y, x) += a;
    }
  }
  return out;
}

DeconvChainResult simulate_deconv_chain(const DeconvChainConfig& cfg) {
  if (cfg.stride < 1 || cfg.layers < 1 || cfg.kernel_side < 1 || cfg.trials < 1 || cfg.render_size < 2) {
    throw Error(ErrorCode::BadConfig, "deconvolution chain needs positive layers, stride, kernel and trials");
  }
  std::size_t native = 1;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    native *= cfg.stride;
    if (native > cfg.render_size) {
      throw Error(ErrorCode::BadConfig, "stride^layers exceeds the render size");
    }
  }
  if (cfg.render_size % native != 0) {
    throw Error(ErrorCode::BadConfig, "stride^layers must divide the render size");
  }

  const std::size_t ks = cfg.kernel_side;
  std::vector<std::vector<double>> kernels(cfg.layers, std::vector<double>(ks * ks));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    Rng rng(derive_seed(cfg.seed, l));
    for (double& w : kernels[l]) w = rng.normal();
  }

  auto run_chain = [&](double input) {
    std::vector<double> cur{input};
    std::size_t n = 1;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      const std::size_t m = n * cfg.stride;
      std::vector<double> up(m * m, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) up[i * cfg.stride * m + j * cfg.stride] = cur[i * n + j];
      }
      // Circular padding keeps the output exactly periodic.
      std::vector<double> out(m * m, 0.0);
      const long r = static_cast<long>(ks / 2);
      const auto& w = kernels[l];
      for (std::size_t y = 0; y < m; ++y) {
        for (std::size_t x = 0; x < m; ++x) {
          double acc = 0.0;
          for (std::size_t a = 0; a < ks; ++a) {
            const std::size_t sy = wrap(static_cast<long>(y) - static_cast<long>(a) + r, m);
            for (std::size_t b = 0; b < ks; ++b) {
              const std::size_t sx = wrap(static_cast<long>(x) - static_cast<long>(b) + r, m);
              acc += w[a * ks + b] * up[sy * m + sx];
            }
          }
          out[y * m + x] = acc;
        }
      }
      cur = std::move(out);
      n = m;
    }
    return cur;
  };

  std::vector<double> mean(native * native, 0.0);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL, t));
    const auto img = run_chain(rng.uniform());
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += img[i];
  }
  for (double& v : mean) v /= static_cast<double>(cfg.trials);

  DeconvChainResult result;
  result.native_size = native;
  result.mean_image = FloatImage(cfg.render_size, cfg.render_size);
  for (std::size_t y = 0; y < cfg.render_size; ++y) {
    for (std::size_t x = 0; x < cfg.render_size; ++x) {
      result.mean_image(y, x) = mean[(y % native) * native + (x % native)];
    }
  }
  result.mean_spectrum = axis_average(power_spectrum(result.mean_image), cfg.axis, cfg.profile);
  return result;
}

FloatImage power_law_field(std::size_t size, double alpha, std::uint64_t seed) {
  if (size < 2) throw Error(ErrorCode::BadConfig, "field size must be at least 2");
  const std::size_t half_cols = size / 2 + 1;
  auto in = fftw_buffer<double>(size * size);
  auto spec = fftw_buffer<fftw_complex>(size * half_cols);
  Rng rng(seed);
  for (std::size_t i = 0; i < size * size; ++i) in[i] = rng.normal();
  fftw_execute_dft_r2c(PlanCache::instance().forward(size), in.get(), spec.get());

  const double n = static_cast<double>(size);
  for (std::size_t ky = 0; ky < size; ++ky) {
    const double fy = (ky <= size / 2 ? static_cast<double>(ky) : static_cast<double>(ky) - n) / n;
    for (std::size_t kx = 0; kx < half_cols; ++kx) {
      const double fx = static_cast<double>(kx) / n;
      const double f = std::sqrt(fx * fx + fy * fy);
      const double gain = f > 0.0 ? std::pow(f, -alpha / 2.0) : 0.0;
      spec[ky * half_cols + kx][0] *= gain;
      spec[ky * half_cols + kx][1] *= gain;
    }
  }
  fftw_execute_dft_c2r(PlanCache::instance().backward(size), spec.get(), in.get());

  FloatImage out(size, size);
  auto v = out.values();
  double mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = in[i];
    mean += v[i];
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double& x : v) {
    x -= mean;
    var += x * x;
  }
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  if (sd > 0.0) {
    for (double& x : v) x /= sd;
  }
  return out;
}

FloatImage comb_field(std::size_t size, double alpha, std::uint64_t seed, double amplitude, std::size_t layers) {
  FloatImage field = power_law_field(size, alpha, seed);
  const std::vector<double> ones(layers - 1, 1.0);
  const GrayImage comb = impulse_pattern(size, layers, ones);
  auto c = comb.values();
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  auto v = field.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += amplitude * (c[i] - mean);
  return field;
}

GrayImage render_gray(const FloatImage& field, double contrast, double offset) {
  GrayImage out(field.width(), field.height());
  auto src = field.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(offset + contrast * src[i], 0.0, 255.0);
  return out;
}

void to_json(nlohmann::json& j, const Spectrum1D& s) {
  j = nlohmann::json{{"freqs", s.freqs}, {"power", s.power}};
}

void from_json(const nlohmann::json& j, Spectrum1D& s) {
  s.freqs = j.at("freqs").get<std::vector<double>>();
  s.power = j.at("power").get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const SpikeReport& r) {
  j = nlohmann::json{{"base_freq", r.base_freq},     {"threshold_db", r.threshold_db},
                     {"spike_freqs", r.spike_freqs}, {"prominences", r.prominences},
                     {"spikiness", r.spikiness}};
}

void to_json(nlohmann::json& j, const PowerLawFit& f) {
  j = nlohmann::json{{"log_A", f.log_A}, {"alpha", f.alpha}, {"residual", f.residual}, {"n_points", f.n_points}};
}

std::string spectrum_csv(const Spectrum1D& s) {
  std::ostringstream os;
  os << "freq,power\n";
  for (std::size_t i = 0; i < s.freqs.size(); ++i) {
    os << format_double(s.freqs[i]) << ',' << format_double(s.power[i]) << '\n';
  }
  return os.str();
}

}  // namespace imgstat
