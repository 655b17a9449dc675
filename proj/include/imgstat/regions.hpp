#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "imgstat/image.hpp"

namespace imgstat {

// Integer gray levels in [0, 255].
using LevelImage = Raster<std::uint8_t>;

// Luma rounded half-up and clamped to [0, 255].
LevelImage quantize_gray(const GrayImage& gray);

struct ThresholdSeries {
  std::size_t n_levels = 16;
  std::vector<int> thresholds;  // t_1 .. t_N, nondecreasing
};

// t_n is the least integer with strictly more than n*H*W/N pixels below it.
// When no integer qualifies (always the case for n = N) t_n is max + 1.
ThresholdSeries quantile_thresholds(const LevelImage& gray, std::size_t n_levels);

enum class Connectivity { Four = 4, Eight = 8 };

// Region area -> number of regions of that area.
using AreaHistogram = std::map<std::size_t, std::size_t>;

// Band n holds t_{n-1} <= g < t_n with t_0 = 0. Components are labelled per
// band with a two-pass union-find and their areas pooled.
AreaHistogram segment_and_count(const LevelImage& gray, const ThresholdSeries& thresholds,
                                Connectivity connectivity = Connectivity::Eight);

// Per-pixel band index; exposed for tests and plotting.
Raster<std::uint16_t> band_map(const LevelImage& gray, const ThresholdSeries& thresholds);

struct RegionLawFit {
  double K = 0.0;
  double c = 0.0;
  double residual = 0.0;  // mean squared natural-log deviation over occupied sizes
  std::size_t lattice = 1;  // gcd of the occupied sizes used for the fit
};

inline constexpr std::size_t kDefaultSMax = 90;

// Discrete power-law maximum likelihood for N(s) = K s^c over sizes
// below s_max. The likelihood is normalized over the multiples of the gcd
// of the occupied sizes, so a histogram whose areas all share a factor
// (e.g. after block upsampling) is fitted on its own lattice. K makes the
// predicted count below s_max equal the observed one.
RegionLawFit fit_region_law(const AreaHistogram& hist, std::size_t s_max = kDefaultSMax);

}  // namespace imgstat
