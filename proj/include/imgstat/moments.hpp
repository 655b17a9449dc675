#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace imgstat {

// Binned distribution. `counts` may be raw tallies or a per-bin probability
// mass (after averaging); `total` always equals the sum of counts.
struct Histogram {
  std::vector<double> edges;   // B+1, strictly increasing
  std::vector<double> counts;  // B
  double total = 0.0;
  std::size_t underflow = 0;
  std::size_t overflow = 0;  // also holds NaN samples

  std::size_t bins() const { return counts.size(); }
  // Per-bin probability mass, counts / total. Empty when total is zero.
  std::vector<double> density() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct MomentSummary {
  double mean = 0.0;
  double std = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

// Population (divide-by-n) moments. Throws DegenerateSample for n < 2 or
// zero variance.
MomentSummary moment_summary(std::span<const double> samples);

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// Bin i holds edges[i] <= x < edges[i+1]; the last edge is inclusive.
Histogram build_histogram(std::span<const double> samples, std::span<const double> edges);

// Equal-weight average of per-histogram densities. Histograms with zero
// in-range mass carry no density and are left out of the average.
Histogram average_histograms(std::span<const Histogram> list);

inline constexpr double kKlEpsilon = 1e-12;

// KL(p || q) in nats. Both are normalized to unit mass; q is floored at
// kKlEpsilon and renormalized first.
double kl_divergence(const Histogram& p, const Histogram& q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

void to_json(nlohmann::json& j, const Histogram& h);
void from_json(const nlohmann::json& j, Histogram& h);
// Columns: edge_low,edge_high,density
std::string histogram_csv(const Histogram& h);

}  // namespace imgstat
