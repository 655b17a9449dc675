#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "imgstat/colorspace.hpp"
#include "imgstat/contrast.hpp"
#include "imgstat/error.hpp"
#include "imgstat/random.hpp"
#include "oracles.hpp"

using namespace imgstat;
using doctest::Approx;

namespace {

TriChannelImage planes_of(const FloatImage& e1, double fill2 = 0.0, double fill3 = 0.0) {
  TriChannelImage t;
  t.planes = {e1, FloatImage(e1.width(), e1.height(), fill2), FloatImage(e1.width(), e1.height(), fill3)};
  return t;
}

TriChannelImage random_planes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  TriChannelImage t;
  for (auto& p : t.planes) {
    p = FloatImage(n, n);
    for (auto& v : p.values()) v = 255.0 * rng.uniform();
  }
  return t;
}

// Eq. value straight from the formula, before mean subtraction.
double gx(int x, int y, double s) {
  return -x / (2.0 * std::numbers::pi * std::pow(s, 4)) * std::exp(-(x * x + y * y) / (2.0 * s * s));
}

}  // namespace

TEST_CASE("derivative kernel shape") {
  for (double s : {0.5, 1.0, 1.7, 2.0}) {
    const auto k = gaussian_derivative_kernels(s);
    const int r = static_cast<int>(k.radius);
    CHECK(k.radius == static_cast<std::size_t>(std::ceil(3.0 * s)));
    CHECK(k.kx.side == 2 * k.radius + 1);
    CHECK(k.x_at(0, 0) == Approx(0.0).epsilon(1e-15));
    double sx = 0, sy = 0;
    for (int y = -r; y <= r; ++y) {
      for (int x = -r; x <= r; ++x) {
        CHECK(k.x_at(-x, y) == Approx(-k.x_at(x, y)).epsilon(1e-15));
        CHECK(k.x_at(x, y) == k.y_at(y, x));
        CHECK(k.x_at(x, y) == Approx(gx(x, y, s)).epsilon(1e-12));
        sx += k.x_at(x, y);
        sy += k.y_at(x, y);
      }
    }
    CHECK(std::abs(sx) < 1e-6);
    CHECK(std::abs(sy) < 1e-6);
  }
}

TEST_CASE("derivative kernel ratio at sigma 1") {
  // -1 e^{-1/2} / (-2 e^{-2}) = e^{3/2} / 2
  const auto k = gaussian_derivative_kernels(1.0);
  CHECK(k.x_at(1, 0) / k.x_at(2, 0) == Approx(std::exp(1.5) / 2.0).epsilon(1e-12));
  CHECK(k.x_at(1, 0) / k.x_at(2, 0) == Approx(2.2408).epsilon(1e-4));
}

TEST_CASE("bad sigma") {
  for (double s : {0.0, -1.0, std::nan("")}) {
    try {
      gaussian_derivative_kernels(s);
      FAIL("expected BadSigma");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadSigma);
    }
  }
}

TEST_CASE("constant image has zero contrast") {
  const auto k = gaussian_derivative_kernels(1.0);
  const FloatImage m = gradient_magnitude(planes_of(FloatImage(20, 20, 80.0), 3.0, 9.0), k);
  for (double v : m.values()) CHECK(v == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("contrast is homogeneous and offset invariant") {
  const auto k = gaussian_derivative_kernels(1.0);
  const TriChannelImage t = random_planes(24, 4);
  TriChannelImage scaled = t, shifted = t;
  for (auto& p : scaled.planes)
    for (auto& v : p.values()) v *= 3.5;
  for (auto& v : shifted.planes[1].values()) v += 40.0;
  const FloatImage a = gradient_magnitude(t, k);
  const FloatImage b = gradient_magnitude(scaled, k);
  const FloatImage c = gradient_magnitude(shifted, k);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.values()[i] == Approx(3.5 * a.values()[i]).epsilon(1e-10));
    CHECK(c.values()[i] == Approx(a.values()[i]).epsilon(1e-10));
    CHECK(a.values()[i] >= 0.0);
  }
}

TEST_CASE("vertical step edge matches dense convolution") {
  const std::size_t n = 32;
  FloatImage e1(n, n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 16; c < n; ++c) e1(r, c) = 100.0;

  const double s = 1.0;
  const int rad = 3;
  double mean = 0;
  for (int y = -rad; y <= rad; ++y)
    for (int x = -rad; x <= rad; ++x) mean += gx(x, y, s);
  mean /= 49.0;
  auto reflect = [](long i, long len) {
    while (i < 0 || i >= len) i = i < 0 ? -i : 2 * (len - 1) - i;
    return i;
  };
  FloatImage expect(n, n, 0.0);
  const long ln = static_cast<long>(n);
  for (long r = 0; r < ln; ++r) {
    for (long c = 0; c < ln; ++c) {
      double rx = 0, ry = 0;
      for (int y = -rad; y <= rad; ++y) {
        for (int x = -rad; x <= rad; ++x) {
          const double v = e1(reflect(r - y, ln), reflect(c - x, ln));
          rx += (gx(x, y, s) - mean) * v;
          ry += (gx(y, x, s) - mean) * v;
        }
      }
      expect(r, c) = std::sqrt(rx * rx + ry * ry);
    }
  }

  const FloatImage got = gradient_magnitude(planes_of(e1), gaussian_derivative_kernels(s));
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == Approx(expect.values()[i]).epsilon(1e-10));

  for (std::size_t r = 0; r < n; ++r) {
    auto row = got.row(r);
    const auto peak = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    CHECK((peak == 15 || peak == 16));
    CHECK(row[5] < 1e-9);
    CHECK(row[27] < 1e-9);
  }
}

TEST_CASE("image smaller than kernel") {
  const auto k = gaussian_derivative_kernels(2.0);
  try {
    gradient_magnitude(planes_of(FloatImage(10, 10, 1.0)), k);
    FAIL("expected ImageSmallerThanKernel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImageSmallerThanKernel);
  }
}

TEST_CASE("weibull recovery at three operating points") {
  struct Point {
    double gamma, beta;
  };
  for (auto [g, b] : {Point{1.15, 1250.0}, Point{1.0, 1.0}, Point{2.0, 5.0}}) {
    const auto x = oracle::weibull_draws(g, b, 100000, 77);
    const WeibullFit f = fit_weibull(x);
    CHECK(std::abs(f.gamma / g - 1.0) < 0.02);
    CHECK(std::abs(f.beta / b - 1.0) < 0.02);
    CHECK(f.kld >= 0.0);
    CHECK(f.kld < 0.01);
    CHECK(f.n_positive == 100000);
  }
}

TEST_CASE("weibull fit is scale equivariant") {
  auto x = oracle::weibull_draws(1.15, 1250.0, 20000, 5);
  const WeibullFit a = fit_weibull(x);
  for (double& v : x) v *= 7.0;
  const WeibullFit b = fit_weibull(x);
  CHECK(std::abs(b.gamma - a.gamma) < 1e-3);
  CHECK(b.beta == Approx(7.0 * a.beta).epsilon(1e-3));
}

TEST_CASE("weibull mle satisfies the score equation") {
  const auto x = oracle::weibull_draws(0.8, 3.0, 5000, 9);
  const WeibullFit f = fit_weibull(x);
  // d/dgamma log L = n/gamma + sum ln x - n * sum(x^g ln x) / sum(x^g) = 0
  double s0 = 0, s1 = 0, sl = 0;
  for (double v : x) {
    const double p = std::pow(v, f.gamma);
    s0 += p;
    s1 += p * std::log(v);
    sl += std::log(v);
  }
  const double n = static_cast<double>(x.size());
  CHECK(std::abs(1.0 / f.gamma + sl / n - s1 / s0) < 1e-8);
  CHECK(f.beta == Approx(std::pow(s0 / n, 1.0 / f.gamma)).epsilon(1e-10));
}

TEST_CASE("weibull zeros and degenerate input") {
  auto x = oracle::weibull_draws(1.0, 1.0, 1000, 3);
  x.insert(x.end(), 250, 0.0);
  const WeibullFit f = fit_weibull(x);
  CHECK(f.zero_fraction == Approx(0.2));
  CHECK(f.n_positive == 1000);

  std::vector<double> few(99, 1.0);
  try {
    fit_weibull(few);
    FAIL("expected NoPositiveSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPositiveSamples);
  }
  std::vector<double> flat(500, 2.0);
  try {
    fit_weibull(flat);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("weibull cdf") {
  CHECK(weibull_cdf(0.0, 2.0, 1.5) == 0.0);
  CHECK(weibull_cdf(2.0, 2.0, 1.5) == Approx(1.0 - std::exp(-1.0)));
}
