#include "imgstat/random_filters.hpp"

#include <cmath>

#include "imgstat/random.hpp"

namespace imgstat {

RandomFilter make_random_filter(std::size_t side, std::uint64_t seed) {
  if (side < 2) throw Error(ErrorCode::BadSide, "random filter side must be at least 2");
  Rng rng(seed);
  std::vector<double> w(side * side);
  double mean = 0.0;
  for (double& v : w) {
    v = rng.uniform();
    mean += v;
  }
  mean /= static_cast<double>(w.size());
  double norm = 0.0;
  for (double& v : w) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw Error(ErrorCode::BadSide, "degenerate random matrix");
  for (double& v : w) v /= norm;
  return RandomFilter{side, seed, Kernel{side, std::move(w)}};
}

std::vector<RandomFilter> make_filter_battery(std::size_t count, std::size_t side, std::uint64_t seed) {
  std::vector<RandomFilter> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_random_filter(side, seed + i));
  return out;
}

std::vector<double> filter_responses(const GrayImage& gray, const RandomFilter& filter) {
  const FloatImage resp = convolve_valid(gray, filter.kernel);
  auto v = resp.values();
  return {v.begin(), v.end()};
}

std::vector<double> symmetric_edges(double half_range, std::size_t bins) {
  if (!(half_range > 0.0)) throw Error(ErrorCode::BadEdges, "symmetric range must be positive");
  return uniform_edges(-half_range, half_range, bins);
}

FilterResponseStats filter_response_kurtosis(const GrayImage& gray, const RandomFilter& filter,
                                             std::span<const double> edges) {
  const auto resp = filter_responses(gray, filter);
  FilterResponseStats out;
  out.histogram = build_histogram(resp, edges);
  try {
    out.kurtosis = moment_summary(resp).kurtosis;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSample) throw;
  }
  return out;
}

void to_json(nlohmann::json& j, const RandomFilter& f) {
  j = nlohmann::json{{"seed", f.seed}, {"side", f.side}, {"weights", f.kernel.weights}};
}

void from_json(const nlohmann::json& j, RandomFilter& f) {
  f.seed = j.at("seed").get<std::uint64_t>();
  f.side = j.at("side").get<std::size_t>();
  auto w = j.at("weights").get<std::vector<double>>();
  if (f.side < 2 || w.size() != f.side * f.side) {
    throw Error(ErrorCode::BadSide, "filter weights do not match side");
  }
  double sum = 0.0, norm = 0.0;
  for (double v : w) {
    sum += v;
    norm += v * v;
  }
  if (std::abs(sum) > 1e-9 || std::abs(std::sqrt(norm) - 1.0) > 1e-9) {
    throw Error(ErrorCode::BadConfig, "filter is not zero-mean with unit norm");
  }
  f.kernel = Kernel{f.side, std::move(w)};
}

}  // namespace imgstat
