#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "imgstat/error.hpp"
#include "imgstat/random.hpp"
#include "imgstat/spectrum.hpp"
#include "oracles.hpp"

using namespace imgstat;
using doctest::Approx;

namespace {

GrayImage random_gray(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage g(n, n);
  for (auto& v : g.values()) v = 255.0 * rng.uniform();
  return g;
}

double total(const SpectrumGrid& g) { return std::accumulate(g.power.begin(), g.power.end(), 0.0); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an imgstat::Error");
  return ErrorCode::IoError;
}

Spectrum1D power_law_spectrum(std::size_t size, double alpha) {
  Spectrum1D s;
  for (std::size_t k = 1; k <= size / 2; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(size);
    s.freqs.push_back(f);
    s.power.push_back(std::pow(f, -alpha));
  }
  return s;
}

bool on_multiple(double f, double base) {
  const double k = f / base;
  return std::abs(k - std::round(k)) < 1e-9;
}

}  // namespace

TEST_CASE("constant image has an empty spectrum") {
  const SpectrumGrid g = power_spectrum(GrayImage(16, 16, 90.0));
  for (double p : g.power) CHECK(p == 0.0);
}

TEST_CASE("pure cosine lands in two bins") {
  const std::size_t n = 128;
  GrayImage g(n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) g(y, x) = std::cos(2.0 * std::numbers::pi * 8.0 * static_cast<double>(x) / 128.0);
  const SpectrumGrid s = power_spectrum(g);
  const double expect = std::pow(128.0 * 128.0 / 2.0, 2);
  CHECK(s.at_frequency(0, 8) == Approx(expect).epsilon(1e-9));
  CHECK(s.at_frequency(0, -8) == Approx(expect).epsilon(1e-9));
  const double in_bins = s.at_frequency(0, 8) + s.at_frequency(0, -8);
  CHECK(in_bins / total(s) >= 0.999999);
  for (long ky = -64; ky < 64; ++ky)
    for (long kx = -64; kx < 64; ++kx)
      if (!(ky == 0 && std::abs(kx) == 8)) CHECK(s.at_frequency(ky, kx) <= 1e-9 * expect);
}

TEST_CASE("parseval") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t n : {16u, 30u, 64u}) {
      const GrayImage g = random_gray(n, seed);
      auto v = g.values();
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      CHECK(total(power_spectrum(g)) / static_cast<double>(n * n) == Approx(ss).epsilon(1e-6));
    }
  }
}

TEST_CASE("fft agrees with a direct dft") {
  for (std::size_t n : {6u, 8u, 9u}) {
    const GrayImage g = random_gray(n, n);
    const auto ref = oracle::naive_dft_power(g);
    const SpectrumGrid s = power_spectrum(g);
    const long ln = static_cast<long>(n);
    for (long ky = 0; ky < ln; ++ky) {
      for (long kx = 0; kx < ln; ++kx) {
        CHECK(s.at_frequency(ky, kx) == Approx(ref[static_cast<std::size_t>(ky * ln + kx)]).epsilon(1e-9).scale(1e-6));
      }
    }
    CHECK(s.at(n / 2, n / 2) == Approx(0.0).scale(1e-6));
  }
}

TEST_CASE("conjugate symmetry") {
  const std::size_t n = 32;
  const SpectrumGrid s = power_spectrum(random_gray(n, 5));
  for (long ky = -15; ky < 16; ++ky)
    for (long kx = -15; kx < 16; ++kx) CHECK(s.at_frequency(ky, kx) == Approx(s.at_frequency(-ky, -kx)).epsilon(1e-6));
}

TEST_CASE("non-square input") {
  CHECK(code_of([] { power_spectrum(GrayImage(8, 4, 1.0)); }) == ErrorCode::NonSquareImage);
}

TEST_CASE("axis profiles") {
  SpectrumGrid g;
  g.size = 16;
  g.power.assign(256, 0.0);
  g.power[8 * 16 + 8 + 3] = 5.0;  // (ky, kx) = (0, 3)
  for (auto prof : {AxisProfile::Slice, AxisProfile::Marginal}) {
    const Spectrum1D h = axis_average(g, SpectrumAxis::Horizontal, prof);
    CHECK(h.freqs.size() == 8);
    CHECK(h.freqs.back() == 0.5);
    for (std::size_t i = 0; i < 8; ++i) CHECK((h.power[i] > 0.0) == (i == 2));
    const Spectrum1D v = axis_average(g, SpectrumAxis::Vertical, prof);
    for (double p : v.power) CHECK(p == 0.0);
  }

  SpectrumGrid iso;
  iso.size = 16;
  iso.power.assign(256, 0.0);
  for (long ky = -8; ky < 8; ++ky)
    for (long kx = -8; kx < 8; ++kx)
      iso.power[static_cast<std::size_t>((ky + 8) * 16 + kx + 8)] = 1.0 / (1.0 + static_cast<double>(ky * ky + kx * kx));
  for (auto prof : {AxisProfile::Slice, AxisProfile::Marginal}) {
    CHECK(axis_average(iso, SpectrumAxis::Horizontal, prof) == axis_average(iso, SpectrumAxis::Vertical, prof));
  }
  CHECK(axis_profile_from_string(to_string(AxisProfile::Marginal)) == AxisProfile::Marginal);
  CHECK(code_of([] { axis_profile_from_string("radial"); }) == ErrorCode::BadConfig);
}

TEST_CASE("power-law fit on exact samples") {
  const Spectrum1D s = power_law_spectrum(128, 2.0);
  const PowerLawFit f = fit_power_law(s);
  CHECK(f.alpha == Approx(2.0).epsilon(1e-12));
  CHECK(f.residual == Approx(0.0).scale(1e-20));
  CHECK(f.n_points == 61);

  Spectrum1D scaled = s;
  for (double& p : scaled.power) p *= 1234.5;
  const PowerLawFit g = fit_power_law(scaled);
  CHECK(g.alpha == Approx(f.alpha).epsilon(1e-12));
  CHECK(g.log_A == Approx(f.log_A + std::log(1234.5)).epsilon(1e-12));

  CHECK(code_of([&] { fit_power_law(s, 0.1, 0.12); }) == ErrorCode::InsufficientSupport);
}

TEST_CASE("power-law field slope") {
  for (auto axis : {SpectrumAxis::Horizontal, SpectrumAxis::Vertical}) {
    Spectrum1D mean;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Spectrum1D s = axis_average(power_spectrum(power_law_field(128, 2.0, seed)), axis);
      if (mean.freqs.empty()) mean = s;
      else
        for (std::size_t i = 0; i < s.power.size(); ++i) mean.power[i] += s.power[i];
    }
    CHECK(std::abs(fit_power_law(mean).alpha - 2.0) < 0.1);
  }
  const FloatImage f = power_law_field(64, 2.0, 9);
  auto v = f.values();
  double m = 0, ss = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) ss += (x - m) * (x - m);
  CHECK(std::abs(m) < 1e-12);
  CHECK(ss / static_cast<double>(v.size()) == Approx(1.0).epsilon(1e-9));
  CHECK(power_law_field(64, 2.0, 9) == f);
}

TEST_CASE("smooth spectrum has no spikes") {
  const SpikeReport r = detect_spikes(power_law_spectrum(128, 2.0), 4.0 / 128.0);
  CHECK(r.spike_freqs.empty());
  CHECK(std::abs(r.spikiness) < 0.5);
}

TEST_CASE("constructed bumps are found") {
  Spectrum1D s = power_law_spectrum(128, 2.0);
  for (std::size_t i = 0; i < s.freqs.size(); ++i)
    if (on_multiple(s.freqs[i], 4.0 / 128.0)) s.power[i] *= 10.0;
  const SpikeReport r = detect_spikes(s, 4.0 / 128.0, 6.0);
  std::vector<double> expect;
  for (int k = 1; k <= 16; ++k) expect.push_back(4.0 * k / 128.0);
  CHECK(r.spike_freqs == expect);
  for (double p : r.prominences) CHECK(p >= 6.0);
  CHECK(r.spikiness == Approx(10.0).epsilon(0.05));
}

TEST_CASE("off-grid base frequency") {
  CHECK(code_of([] { detect_spikes(power_law_spectrum(128, 2.0), 0.013); }) == ErrorCode::BaseFreqOffGrid);
  CHECK(code_of([] { detect_spikes(power_law_spectrum(128, 2.0), 0.0); }) == ErrorCode::BaseFreqOffGrid);
}

TEST_CASE("impulse patterns") {
  const std::vector<double> one{1.0};
  const GrayImage p2 = impulse_pattern(8, 2, one);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) CHECK(p2(y, x) == ((y % 2 == 0 && x % 2 == 0) ? 1.0 : 0.0));

  const std::vector<double> zeros(4, 0.0);
  CHECK(impulse_pattern(32, 5, zeros) == GrayImage(32, 32, 0.0));

  const std::vector<double> amps{1.0, 0.5, 2.0, 0.7};
  const SpectrumGrid s = power_spectrum(impulse_pattern(128, 5, amps));
  const double peak = *std::max_element(s.power.begin(), s.power.end());
  for (long ky = -64; ky < 64; ++ky)
    for (long kx = -64; kx < 64; ++kx)
      if (ky % 8 != 0 || kx % 8 != 0) CHECK(s.at_frequency(ky, kx) <= 1e-20 * peak);

  const SpikeReport r = detect_spikes(axis_average(s, SpectrumAxis::Horizontal), 1.0 / 16.0);
  std::vector<double> expect;
  for (int k = 1; k <= 8; ++k) expect.push_back(k / 16.0);
  CHECK(r.spike_freqs == expect);

  const std::vector<double> five(5, 1.0);
  CHECK(code_of([&] { impulse_pattern(16, 6, five); }) == ErrorCode::PeriodExceedsImage);
  CHECK(code_of([&] { impulse_pattern(128, 5, one); }) == ErrorCode::BadConfig);
}

TEST_CASE("deconvolution chain leaves a comb") {
  DeconvChainConfig cfg;
  cfg.trials = 50;
  cfg.seed = 3;
  const DeconvChainResult a = simulate_deconv_chain(cfg);
  CHECK(a.native_size == 32);
  CHECK(a.mean_image.width() == 128);
  const SpikeReport r = detect_spikes(a.mean_spectrum, 4.0 / 128.0);
  CHECK(!r.spike_freqs.empty());
  for (double f : r.spike_freqs) CHECK(on_multiple(f, 1.0 / 32.0));
  CHECK(r.spikiness >= 6.0);

  cfg.trials = 1;
  const SpikeReport one = detect_spikes(simulate_deconv_chain(cfg).mean_spectrum, 4.0 / 128.0);
  CHECK(one.spike_freqs == r.spike_freqs);

  // Periodic tiling: autocorrelation is maximal at lags that are multiples of the period.
  const FloatImage& m = a.mean_image;
  auto autocorr = [&](std::size_t lag) {
    double acc = 0;
    for (std::size_t y = 0; y < 128; ++y)
      for (std::size_t x = 0; x < 128; ++x) acc += m(y, x) * m(y, (x + lag) % 128);
    return acc;
  };
  CHECK(autocorr(32) == Approx(autocorr(0)).epsilon(1e-12));
  CHECK(autocorr(64) == Approx(autocorr(0)).epsilon(1e-12));
}

TEST_CASE("stride one control is smooth") {
  DeconvChainConfig cfg;
  cfg.stride = 1;
  cfg.trials = 20;
  const DeconvChainResult r = simulate_deconv_chain(cfg);
  const SpikeReport s = detect_spikes(r.mean_spectrum, 4.0 / 128.0);
  CHECK(s.spike_freqs.empty());
}

TEST_CASE("deconvolution chain config errors") {
  DeconvChainConfig cfg;
  cfg.layers = 8;
  CHECK(code_of([&] { simulate_deconv_chain(cfg); }) == ErrorCode::BadConfig);
  cfg.layers = 2;
  cfg.stride = 3;
  CHECK(code_of([&] { simulate_deconv_chain(cfg); }) == ErrorCode::BadConfig);
  cfg.stride = 2;
  cfg.trials = 0;
  CHECK(code_of([&] { simulate_deconv_chain(cfg); }) == ErrorCode::BadConfig);
}

TEST_CASE("comb field carries spikes at multiples of 1/32") {
  Spectrum1D mean;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Spectrum1D s = axis_average(power_spectrum(comb_field(128, 2.0, seed, 0.5)), SpectrumAxis::Horizontal);
    if (mean.freqs.empty()) mean = s;
    else
      for (std::size_t i = 0; i < s.power.size(); ++i) mean.power[i] += s.power[i];
  }
  const SpikeReport r = detect_spikes(mean, 4.0 / 128.0);
  CHECK(std::find(r.spike_freqs.begin(), r.spike_freqs.end(), 0.25) != r.spike_freqs.end());
  CHECK(std::find(r.spike_freqs.begin(), r.spike_freqs.end(), 0.5) != r.spike_freqs.end());
  CHECK(r.spikiness > 6.0);
  for (double f : r.spike_freqs) CHECK(on_multiple(f, 1.0 / 32.0));
}

TEST_CASE("render clamps to 8-bit range") {
  FloatImage f(3, 1);
  f(0, 0) = -10;
  f(0, 1) = 0;
  f(0, 2) = 10;
  const GrayImage g = render_gray(f);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 128.0);
  CHECK(g(0, 2) == 255.0);
}

TEST_CASE("spectrum csv") {
  const std::string csv = spectrum_csv(power_law_spectrum(8, 2.0));
  CHECK(csv.rfind("freq,power\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
