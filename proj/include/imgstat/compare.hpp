#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "imgstat/contrast.hpp"
#include "imgstat/corpus_io.hpp"
#include "imgstat/moments.hpp"
#include "imgstat/random_filters.hpp"
#include "imgstat/regions.hpp"
#include "imgstat/spectrum.hpp"

namespace imgstat {

inline constexpr std::string_view kToolVersion = "imgstat 0.1.0";
inline constexpr std::string_view kCorpusStatsSchema = "imgstat.corpus_stats/1";
inline constexpr std::string_view kComparisonSchema = "imgstat.comparison/1";

struct AnalysisConfig {
  std::size_t crop_size = 128;
  double sigma = 1.0;
  std::size_t n_levels = 16;
  Connectivity connectivity = Connectivity::Eight;
  std::size_t s_max = kDefaultSMax;

  std::uint64_t filter_seed = kDefaultFilterSeed;
  std::size_t filter_count = kDefaultFilterCount;
  std::size_t filter_side = kDefaultFilterSide;
  // Set when the battery came from an exported file rather than the seed.
  std::optional<std::vector<RandomFilter>> imported_filters;

  std::size_t luminance_bins = 100;
  double luminance_max = 5.0;
  std::size_t contrast_bins = 256;
  double contrast_quantile = 0.999;
  std::size_t filter_bins = 256;
  double filter_quantile = 0.999;
  std::size_t weibull_bins = kWeibullDefaultBins;

  double spike_base_freq = kDefaultSpikeBaseFreq;
  double spike_threshold_db = kDefaultSpikeThresholdDb;
  std::size_t spike_window = kDefaultSpikeWindow;
  AxisProfile axis_profile = AxisProfile::Slice;

  // Corpus selection; not part of the compatibility check.
  std::uint64_t sample_seed = 0;
  std::optional<std::size_t> sample_limit;

  std::vector<RandomFilter> filters() const;
  // Throws BadConfig / BadSigma / BaseFreqOffGrid for unusable settings.
  void validate() const;
};

// Full snapshot, including the derived fit band, filter digest and PRNG name.
nlohmann::json config_to_json(const AnalysisConfig& c);
AnalysisConfig config_from_json(const nlohmann::json& j);

// Fields whose values differ between two configs, ignoring corpus selection.
std::vector<std::string> config_differences(const AnalysisConfig& a, const AnalysisConfig& b);

// Per-image statistic vector. A statistic that could not be computed is
// nullopt and its reason appears in `flags`.
struct ImageStats {
  std::optional<double> luminance_skewness;
  std::optional<WeibullFit> weibull;
  std::vector<std::optional<double>> filter_kurtosis;
  std::optional<RegionLawFit> region_fit;
  std::optional<PowerLawFit> spectrum_fit_h;
  std::optional<PowerLawFit> spectrum_fit_v;
  std::vector<std::string> flags;
};

// Names of the scalar statistics compared between corpora, in report order.
std::vector<std::string> statistic_names(std::size_t filter_count);
std::optional<double> statistic_value(const ImageStats& s, std::size_t row);

// Everything the per-image battery produces for one cropped image.
struct ImageAnalysis {
  ImageStats stats;
  Histogram luminance;
  Spectrum1D spectrum_h;
  Spectrum1D spectrum_v;
  AreaHistogram areas;
  std::vector<double> contrast;                 // gradient magnitude, row-major
  std::vector<std::vector<double>> responses;   // per filter, valid region
};

class ImageAnalyzer {
 public:
  explicit ImageAnalyzer(AnalysisConfig config);
  ImageAnalysis analyze(const RgbImage& cropped) const;

  // Only the contrast map and filter responses (second histogram pass).
  struct Maps {
    std::vector<double> contrast;
    std::vector<std::vector<double>> responses;
  };
  Maps maps(const RgbImage& cropped) const;

  const AnalysisConfig& config() const { return config_; }
  const std::vector<RandomFilter>& filters() const { return filters_; }

 private:
  AnalysisConfig config_;
  DerivativeKernelPair kernels_;
  std::vector<RandomFilter> filters_;
  std::vector<double> luminance_edges_;
};

struct ImageRecord {
  std::string path;
  ImageStats stats;
};

struct ImageFailure {
  std::string path;
  std::string reason;
};

struct CorpusStats {
  std::string schema{kCorpusStatsSchema};
  std::string tool_version{kToolVersion};
  AnalysisConfig config;
  CorpusManifest manifest;
  std::vector<ImageRecord> images;
  std::vector<ImageFailure> failures;

  Histogram luminance_histogram;
  Histogram contrast_histogram;
  std::vector<Histogram> filter_histograms;
  std::map<std::size_t, double> area_histogram;  // mean regions per image
  Spectrum1D spectrum_h;
  Spectrum1D spectrum_v;
  std::optional<PowerLawFit> mean_fit_h;
  std::optional<PowerLawFit> mean_fit_v;
  std::optional<SpikeReport> spikes_h;
  std::optional<SpikeReport> spikes_v;

  // Non-null values of one statistic row, in image order.
  std::vector<double> samples(std::size_t row) const;
};

// Returns the cropped image for an index, or throws imgstat::Error.
using ImageSource = std::function<RgbImage(std::size_t)>;

// Core driver: per-image battery in parallel, deterministic merge in index
// order. Output is independent of `threads`.
CorpusStats analyze_source(std::size_t count, const ImageSource& source,
                           const std::vector<std::string>& names, const AnalysisConfig& config,
                           unsigned threads);

CorpusStats analyze_corpus(const CorpusManifest& manifest, const AnalysisConfig& config, unsigned threads);

// In-memory images; crops each to config.crop_size.
CorpusStats analyze_images(std::span<const RgbImage> images, const AnalysisConfig& config, unsigned threads);

nlohmann::json corpus_stats_to_json(const CorpusStats& s);
CorpusStats corpus_stats_from_json(const nlohmann::json& j);

// ---- comparison ----

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Unequal-variance two-sample t-test, two-sided.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);
// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

struct ComparisonRow {
  std::string name;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::optional<double> t_stat;
  std::optional<double> p_value;
  std::optional<double> df;
  std::string note;
};

struct ComparisonReport {
  std::string schema{kComparisonSchema};
  std::string tool_version{kToolVersion};
  nlohmann::json config;
  std::string digest_a;
  std::string digest_b;
  std::vector<ComparisonRow> rows;
  std::vector<std::string> ranking;  // statistic names, most similar first
  double mean_p = 0.0;               // heuristic aggregate
  std::string compatibility = "compatible";
};

// Throws ConfigMismatch (message lists the differing fields).
ComparisonReport compare_corpora(const CorpusStats& a, const CorpusStats& b);

nlohmann::json report_to_json(const ComparisonReport& r);
std::string report_table(const ComparisonReport& r);

}  // namespace imgstat
