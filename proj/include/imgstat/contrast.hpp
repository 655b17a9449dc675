#pragma once

#include <cstddef>
#include <span>

#include "imgstat/convolve.hpp"
#include "imgstat/image.hpp"
#include "imgstat/moments.hpp"

namespace imgstat {

// First-order Gaussian derivative kernels. kx(x, y) = -x / (2 pi s^4) *
// exp(-(x^2 + y^2) / (2 s^2)), sampled on [-radius, radius]^2 with
// radius = ceil(3 s), then mean-subtracted. ky is the transpose of kx.
struct DerivativeKernelPair {
  double sigma = 1.0;
  std::size_t radius = 0;
  Kernel kx;
  Kernel ky;

  // Value at integer offset (dx, dy) from the kernel centre.
  double x_at(int dx, int dy) const;
  double y_at(int dx, int dy) const;
};

DerivativeKernelPair gaussian_derivative_kernels(double sigma);

// Local contrast: root-sum-of-squares of the x/y derivative responses of
// all three channels. Mirror borders.
FloatImage gradient_magnitude(const TriChannelImage& img, const DerivativeKernelPair& kernels);

struct WeibullFit {
  double beta = 0.0;   // scale, same units as the samples
  double gamma = 0.0;  // shape
  double kld = 0.0;    // KL(histogram || fitted pdf), nats
  double zero_fraction = 0.0;
  std::size_t n_positive = 0;
};

inline constexpr std::size_t kWeibullMinSamples = 100;
inline constexpr std::size_t kWeibullDefaultBins = 256;
inline constexpr double kWeibullHistogramQuantile = 0.999;

// Maximum-likelihood fit on the strictly positive samples. gamma solves the
// profile score equation, beta = mean(x^gamma)^(1/gamma). The KL term
// compares a histogram of the samples (bins over [0, q99.9]) against the
// fitted cdf integrated per bin.
WeibullFit fit_weibull(std::span<const double> samples, std::size_t bins = kWeibullDefaultBins);

double weibull_cdf(double x, double beta, double gamma);

}  // namespace imgstat
