#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "imgstat/convolve.hpp"
#include "imgstat/image.hpp"
#include "imgstat/moments.hpp"

namespace imgstat {

// Zero-mean, unit-Frobenius-norm filter built from i.i.d. U[0,1) entries.
struct RandomFilter {
  std::size_t side = 8;
  std::uint64_t seed = 0;
  Kernel kernel;

  friend bool operator==(const RandomFilter& a, const RandomFilter& b) {
    return a.side == b.side && a.seed == b.seed && a.kernel.weights == b.kernel.weights;
  }
};

inline constexpr std::size_t kDefaultFilterSide = 8;
inline constexpr std::size_t kDefaultFilterCount = 3;
inline constexpr std::uint64_t kDefaultFilterSeed = 20170101;

RandomFilter make_random_filter(std::size_t side, std::uint64_t seed);

// Seeds seed, seed+1, ..., seed+count-1.
std::vector<RandomFilter> make_filter_battery(std::size_t count, std::size_t side, std::uint64_t seed);

// Valid-region responses, row-major.
std::vector<double> filter_responses(const GrayImage& gray, const RandomFilter& filter);

struct FilterResponseStats {
  Histogram histogram;
  std::optional<double> kurtosis;  // nullopt when the responses are constant
};

// Symmetric bins about zero: `bins` bins over [-half_range, half_range].
std::vector<double> symmetric_edges(double half_range, std::size_t bins);

FilterResponseStats filter_response_kurtosis(const GrayImage& gray, const RandomFilter& filter,
                                             std::span<const double> edges);

void to_json(nlohmann::json& j, const RandomFilter& f);
// Validates the zero-mean / unit-norm invariants.
void from_json(const nlohmann::json& j, RandomFilter& f);

}  // namespace imgstat
