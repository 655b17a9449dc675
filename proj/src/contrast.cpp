#include "imgstat/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace imgstat {

double DerivativeKernelPair::x_at(int dx, int dy) const {
  const auto r = static_cast<int>(radius);
  return kx(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r));
}

double DerivativeKernelPair::y_at(int dx, int dy) const {
  const auto r = static_cast<int>(radius);
  return ky(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r));
}

DerivativeKernelPair gaussian_derivative_kernels(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::BadSigma, "sigma must be positive and finite");
  }
  DerivativeKernelPair pair;
  pair.sigma = sigma;
  pair.radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  const std::size_t side = 2 * pair.radius + 1;
  const int r = static_cast<int>(pair.radius);
  const double s2 = sigma * sigma;
  const double norm = 2.0 * std::numbers::pi * s2 * s2;

  pair.kx = Kernel{side, std::vector<double>(side * side)};
  double sum = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v = -x / norm * std::exp(-(x * x + y * y) / (2.0 * s2));
      pair.kx.weights[static_cast<std::size_t>((y + r) * static_cast<int>(side) + (x + r))] = v;
      sum += v;
    }
  }
  const double mean = sum / static_cast<double>(side * side);
  for (double& v : pair.kx.weights) v -= mean;

  pair.ky = Kernel{side, std::vector<double>(side * side)};
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) pair.ky.weights[a * side + b] = pair.kx.weights[b * side + a];
  }
  return pair;
}

FloatImage gradient_magnitude(const TriChannelImage& img, const DerivativeKernelPair& kernels) {
  const std::size_t side = kernels.kx.side;
  if (img.width() < side || img.height() < side) {
    throw Error(ErrorCode::ImageSmallerThanKernel, "image smaller than derivative kernel");
  }
  FloatImage out(img.width(), img.height(), 0.0);
  auto acc = out.values();
  for (const auto& plane : img.planes) {
    for (const Kernel* k : {&kernels.kx, &kernels.ky}) {
      const FloatImage resp = convolve_reflect(plane, *k);
      auto v = resp.values();
      for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i] * v[i];
    }
  }
  for (double& v : acc) v = std::sqrt(v);
  return out;
}

double weibull_cdf(double x, double beta, double gamma) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / beta, gamma));
}

namespace {

struct ProfileScore {
  double value;       // d/dgamma of the profile log-likelihood, divided by n
  double derivative;  // its derivative in gamma
  double mean_pow;    // mean(u^gamma)
};

// u = x / max(x) in (0, 1], so u^gamma never overflows.
ProfileScore profile_score(std::span<const double> log_u, double mean_log_u, double gamma) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (double lu : log_u) {
    const double p = std::exp(gamma * lu);
    s0 += p;
    s1 += p * lu;
    s2 += p * lu * lu;
  }
  const double m1 = s1 / s0;
  const double m2 = s2 / s0;
  return {1.0 / gamma + mean_log_u - m1, -1.0 / (gamma * gamma) - (m2 - m1 * m1),
          s0 / static_cast<double>(log_u.size())};
}

}  // namespace

WeibullFit fit_weibull(std::span<const double> samples, std::size_t bins) {
  std::vector<double> x;
  x.reserve(samples.size());
  for (double v : samples) {
    if (v > 0.0 && std::isfinite(v)) x.push_back(v);
  }
  WeibullFit fit;
  fit.n_positive = x.size();
  fit.zero_fraction = samples.empty()
                          ? 0.0
                          : 1.0 - static_cast<double>(x.size()) / static_cast<double>(samples.size());
  if (x.size() < kWeibullMinSamples) {
    throw Error(ErrorCode::NoPositiveSamples,
                "Weibull fit needs at least 100 positive samples, got " + std::to_string(x.size()));
  }

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double x_max = *hi_it;
  if (*lo_it == x_max) {
    throw Error(ErrorCode::NoConvergence, "constant samples: Weibull shape is unbounded");
  }

  std::vector<double> log_u(x.size());
  double mean_log_u = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    log_u[i] = std::log(x[i] / x_max);
    mean_log_u += log_u[i];
  }
  mean_log_u /= static_cast<double>(x.size());

  // Starting point from the log-moment estimator gamma ~ pi / (sqrt(6) sd(ln x)).
  double var_log = 0.0;
  for (double lu : log_u) var_log += (lu - mean_log_u) * (lu - mean_log_u);
  var_log /= static_cast<double>(x.size());
  double gamma = std::numbers::pi / std::sqrt(6.0 * std::max(var_log, 1e-300));
  if (!std::isfinite(gamma)) gamma = 1.0;

  // The score is strictly decreasing in gamma: bracket the root first.
  constexpr int kMaxBracket = 200;
  double lo = gamma, hi = gamma;
  int steps = 0;
  while (profile_score(log_u, mean_log_u, lo).value < 0.0) {
    lo *= 0.5;
    if (++steps > kMaxBracket) throw Error(ErrorCode::NoConvergence, "cannot bracket Weibull shape");
  }
  steps = 0;
  while (profile_score(log_u, mean_log_u, hi).value > 0.0) {
    hi *= 2.0;
    if (++steps > kMaxBracket || hi > 1e6) {
      throw Error(ErrorCode::NoConvergence, "Weibull shape diverges (near-constant samples)");
    }
  }

  // Newton with bisection fallback.
  constexpr int kMaxIter = 200;
  gamma = std::clamp(gamma, lo, hi);
  ProfileScore score{};
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    score = profile_score(log_u, mean_log_u, gamma);
    if (score.value > 0.0) {
      lo = gamma;
    } else {
      hi = gamma;
    }
    double next = gamma - score.value / score.derivative;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - gamma) <= 1e-13 * gamma || hi - lo <= 1e-14 * hi) {
      gamma = next;
      converged = true;
      break;
    }
    gamma = next;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "Weibull shape iteration cap reached");
  score = profile_score(log_u, mean_log_u, gamma);

  fit.gamma = gamma;
  fit.beta = x_max * std::pow(score.mean_pow, 1.0 / gamma);

  // Goodness of fit against a histogram over [0, q99.9].
  std::vector<double> sorted = x;
  const auto q_index = static_cast<std::size_t>(
      std::floor(kWeibullHistogramQuantile * static_cast<double>(sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q_index), sorted.end());
  const double upper = sorted[q_index];
  const auto edges = uniform_edges(0.0, upper, bins);
  const Histogram empirical = build_histogram(x, edges);
  std::vector<double> model(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    model[i] = weibull_cdf(edges[i + 1], fit.beta, fit.gamma) - weibull_cdf(edges[i], fit.beta, fit.gamma);
  }
  fit.kld = kl_divergence(empirical.counts, model);
  return fit;
}

}  // namespace imgstat
