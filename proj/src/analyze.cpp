#include <algorithm>
#include <array>
#include <cmath>

#include "imgstat/colorspace.hpp"
#include "imgstat/compare.hpp"
#include "imgstat/parallel.hpp"

namespace imgstat {

namespace {

// Log-spaced integer histogram used to find pooled corpus quantiles. Counts
// are integers, so merging is exact and independent of merge order.
class QuantileSketch {
 public:
  static constexpr std::size_t kBins = 1 << 16;
  static constexpr double kLogLo = -6.0;
  static constexpr double kLogHi = 6.0;

  QuantileSketch() : counts_(kBins, 0) {}

  void add(double v) {
    v = std::abs(v);
    std::size_t bin = 0;
    if (v > 0.0) {
      const double pos = (std::log10(v) - kLogLo) / (kLogHi - kLogLo) * static_cast<double>(kBins);
      bin = pos <= 0.0 ? 0 : std::min(kBins - 1, static_cast<std::size_t>(pos));
    }
    ++counts_[bin];
    ++total_;
  }

  void merge(const QuantileSketch& other) {
    for (std::size_t i = 0; i < kBins; ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
  }

  // Upper edge of the bin holding the q-quantile of |values|.
  double quantile(double q) const {
    if (total_ == 0) return 1.0;
    const auto need = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(total_)));
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i < kBins; ++i) {
      cum += counts_[i];
      if (cum >= std::max<std::uint64_t>(need, 1)) return upper_edge(i);
    }
    return upper_edge(kBins - 1);
  }

 private:
  static double upper_edge(std::size_t bin) {
    return std::pow(10.0, kLogLo + (kLogHi - kLogLo) * static_cast<double>(bin + 1) / static_cast<double>(kBins));
  }

  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct WorkerSketches {
  QuantileSketch contrast;
  std::vector<QuantileSketch> filters;
};

struct PerImage {
  bool ok = false;
  std::string reason;
  ImageStats stats;
  Histogram luminance;
  Spectrum1D spectrum_h;
  Spectrum1D spectrum_v;
  AreaHistogram areas;
};

template <typename Fn>
void flag_on_error(ImageStats& stats, const char* what, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    stats.flags.push_back(std::string(what) + ": " + std::string(to_string(e.code())));
  }
}

// Running mean of per-image densities over fixed edges.
struct DensityAccumulator {
  std::vector<double> edges;
  std::vector<double> sum;
  std::size_t used = 0;

  explicit DensityAccumulator(std::vector<double> e) : edges(std::move(e)), sum(edges.size() - 1, 0.0) {}

  void add(const Histogram& h) {
    if (!(h.total > 0.0)) return;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h.counts[i] / h.total;
    ++used;
  }

  Histogram result() const {
    Histogram out;
    out.edges = edges;
    out.counts = sum;
    out.total = 0.0;
    for (double& c : out.counts) {
      if (used > 0) c /= static_cast<double>(used);
      out.total += c;
    }
    return out;
  }
};

}  // namespace

ImageAnalyzer::ImageAnalyzer(AnalysisConfig config)
    : config_(std::move(config)),
      kernels_(gaussian_derivative_kernels(config_.sigma)),
      filters_(config_.filters()),
      luminance_edges_(uniform_edges(0.0, config_.luminance_max, config_.luminance_bins)) {
  config_.validate();
}

ImageAnalyzer::Maps ImageAnalyzer::maps(const RgbImage& img) const {
  Maps m;
  const FloatImage contrast = gradient_magnitude(to_gaussian_color(img), kernels_);
  m.contrast.assign(contrast.values().begin(), contrast.values().end());
  const GrayImage luma = to_luma(img);
  for (const auto& f : filters_) m.responses.push_back(filter_responses(luma, f));
  return m;
}

ImageAnalysis ImageAnalyzer::analyze(const RgbImage& img) const {
  ImageAnalysis out;
  ImageStats& st = out.stats;
  const GrayImage luma = to_luma(img);

  flag_on_error(st, "luminance", [&] {
    const FloatImage norm = normalize_luminance(luma);
    out.luminance = build_histogram(norm.values(), luminance_edges_);
    st.luminance_skewness = moment_summary(norm.values()).skewness;
  });
  if (out.luminance.edges.empty()) {
    out.luminance.edges = luminance_edges_;
    out.luminance.counts.assign(luminance_edges_.size() - 1, 0.0);
  }

  auto maps_now = maps(img);
  flag_on_error(st, "contrast", [&] { st.weibull = fit_weibull(maps_now.contrast, config_.weibull_bins); });

  for (const auto& resp : maps_now.responses) {
    std::optional<double> k;
    flag_on_error(st, "filter", [&] { k = moment_summary(resp).kurtosis; });
    st.filter_kurtosis.push_back(k);
  }

  flag_on_error(st, "regions", [&] {
    const LevelImage levels = quantize_gray(luma);
    const auto thresholds = quantile_thresholds(levels, config_.n_levels);
    out.areas = segment_and_count(levels, thresholds, config_.connectivity);
    st.region_fit = fit_region_law(out.areas, config_.s_max);
  });

  flag_on_error(st, "spectrum", [&] {
    const SpectrumGrid grid = power_spectrum(luma);
    out.spectrum_h = axis_average(grid, SpectrumAxis::Horizontal, config_.axis_profile);
    out.spectrum_v = axis_average(grid, SpectrumAxis::Vertical, config_.axis_profile);
    const double n = static_cast<double>(grid.size);
    flag_on_error(st, "spectrum_h", [&] { st.spectrum_fit_h = fit_power_law(out.spectrum_h, 2.0 / n, 0.5 - 2.0 / n); });
    flag_on_error(st, "spectrum_v", [&] { st.spectrum_fit_v = fit_power_law(out.spectrum_v, 2.0 / n, 0.5 - 2.0 / n); });
  });

  out.contrast = std::move(maps_now.contrast);
  out.responses = std::move(maps_now.responses);
  return out;
}

std::vector<double> CorpusStats::samples(std::size_t row) const {
  std::vector<double> v;
  v.reserve(images.size());
  for (const auto& rec : images) {
    if (auto x = statistic_value(rec.stats, row)) v.push_back(*x);
  }
  return v;
}

CorpusStats analyze_source(std::size_t count, const ImageSource& source, const std::vector<std::string>& names,
                           const AnalysisConfig& config, unsigned threads) {
  if (count == 0) throw Error(ErrorCode::EmptyCorpus, "corpus is empty");
  const ImageAnalyzer analyzer(config);
  const std::size_t n_filters = analyzer.filters().size();
  threads = std::max(1u, threads);

  // Pass 1: full battery per image; pooled magnitude sketches per worker.
  std::vector<PerImage> results(count);
  std::vector<WorkerSketches> sketches(threads);
  for (auto& s : sketches) s.filters.resize(n_filters);

  parallel_for(count, threads, [&](std::size_t i, unsigned w) {
    PerImage& r = results[i];
    try {
      const RgbImage img = source(i);
      ImageAnalysis a = analyzer.analyze(img);
      for (double v : a.contrast) sketches[w].contrast.add(v);
      for (std::size_t f = 0; f < n_filters; ++f) {
        for (double v : a.responses[f]) sketches[w].filters[f].add(v);
      }
      r.stats = std::move(a.stats);
      r.luminance = std::move(a.luminance);
      r.spectrum_h = std::move(a.spectrum_h);
      r.spectrum_v = std::move(a.spectrum_v);
      r.areas = std::move(a.areas);
      r.ok = true;
    } catch (const Error& e) {
      r.reason = std::string(to_string(e.code())) + ": " + e.what();
    }
  });

  CorpusStats out;
  out.config = config;
  std::vector<std::size_t> ok_indices;
  for (std::size_t i = 0; i < count; ++i) {
    if (results[i].ok) {
      ok_indices.push_back(i);
    } else {
      out.failures.push_back({names.at(i), results[i].reason});
    }
  }
  if (ok_indices.empty()) throw Error(ErrorCode::AllImagesFailed, "no image in the corpus could be analyzed");

  WorkerSketches pooled;
  pooled.filters.resize(n_filters);
  for (const auto& s : sketches) {
    pooled.contrast.merge(s.contrast);
    for (std::size_t f = 0; f < n_filters; ++f) pooled.filters[f].merge(s.filters[f]);
  }

  // Pass 2: histograms over corpus-wide edges, merged in index order.
  DensityAccumulator contrast_acc(uniform_edges(0.0, pooled.contrast.quantile(config.contrast_quantile),
                                                config.contrast_bins));
  std::vector<DensityAccumulator> filter_acc;
  for (std::size_t f = 0; f < n_filters; ++f) {
    filter_acc.emplace_back(
        symmetric_edges(pooled.filters[f].quantile(config.filter_quantile), config.filter_bins));
  }
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < ok_indices.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, ok_indices.size() - start);
    std::vector<std::pair<Histogram, std::vector<Histogram>>> chunk(len);
    parallel_for(len, threads, [&](std::size_t k, unsigned) {
      const auto m = analyzer.maps(source(ok_indices[start + k]));
      chunk[k].first = build_histogram(m.contrast, contrast_acc.edges);
      for (std::size_t f = 0; f < n_filters; ++f) {
        chunk[k].second.push_back(build_histogram(m.responses[f], filter_acc[f].edges));
      }
    });
    for (const auto& [c, fs] : chunk) {
      contrast_acc.add(c);
      for (std::size_t f = 0; f < n_filters; ++f) filter_acc[f].add(fs[f]);
    }
  }
  out.contrast_histogram = contrast_acc.result();
  for (const auto& acc : filter_acc) out.filter_histograms.push_back(acc.result());

  std::vector<Histogram> lum;
  Spectrum1D mean_h, mean_v;
  std::size_t n_spectra = 0;
  std::map<std::size_t, double> areas;
  for (std::size_t i : ok_indices) {
    PerImage& r = results[i];
    if (r.luminance.total > 0.0) lum.push_back(r.luminance);
    if (!r.spectrum_h.freqs.empty()) {
      if (mean_h.freqs.empty()) {
        mean_h = r.spectrum_h;
        mean_v = r.spectrum_v;
      } else {
        for (std::size_t k = 0; k < mean_h.power.size(); ++k) {
          mean_h.power[k] += r.spectrum_h.power[k];
          mean_v.power[k] += r.spectrum_v.power[k];
        }
      }
      ++n_spectra;
    }
    for (const auto& [s, c] : r.areas) areas[s] += static_cast<double>(c);
    out.images.push_back({names.at(i), std::move(r.stats)});
  }
  const auto edges = uniform_edges(0.0, config.luminance_max, config.luminance_bins);
  if (lum.empty()) {
    out.luminance_histogram = Histogram{edges, std::vector<double>(config.luminance_bins, 0.0), 0.0, 0, 0};
  } else {
    out.luminance_histogram = average_histograms(lum);
  }
  for (auto& [s, c] : areas) c /= static_cast<double>(ok_indices.size());
  out.area_histogram = std::move(areas);

  if (n_spectra > 0) {
    for (auto& p : mean_h.power) p /= static_cast<double>(n_spectra);
    for (auto& p : mean_v.power) p /= static_cast<double>(n_spectra);
    out.spectrum_h = std::move(mean_h);
    out.spectrum_v = std::move(mean_v);
    try {
      out.mean_fit_h = fit_power_law(out.spectrum_h);
      out.mean_fit_v = fit_power_law(out.spectrum_v);
    } catch (const Error&) {
    }
    out.spikes_h = detect_spikes(out.spectrum_h, config.spike_base_freq, config.spike_threshold_db,
                                 config.spike_window);
    out.spikes_v = detect_spikes(out.spectrum_v, config.spike_base_freq, config.spike_threshold_db,
                                 config.spike_window);
  }
  return out;
}

CorpusStats analyze_corpus(const CorpusManifest& manifest, const AnalysisConfig& config, unsigned threads) {
  if (manifest.entries.empty()) throw Error(ErrorCode::EmptyCorpus, "manifest has no entries");
  const std::size_t crop = config.crop_size;
  auto source = [&](std::size_t i) { return center_crop(load_image(manifest.entry_path(i)), crop); };
  CorpusStats stats = analyze_source(manifest.entries.size(), source, manifest.entries, config, threads);
  stats.manifest = manifest;
  return stats;
}

CorpusStats analyze_images(std::span<const RgbImage> images, const AnalysisConfig& config, unsigned threads) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < images.size(); ++i) names.push_back("image" + std::to_string(i));
  const std::size_t crop = config.crop_size;
  auto source = [&](std::size_t i) { return center_crop(images[i], crop); };
  CorpusStats stats = analyze_source(images.size(), source, names, config, threads);
  stats.manifest.root = "<memory>";
  stats.manifest.entries = names;
  stats.manifest.crop_size = crop;
  return stats;
}

}  // namespace imgstat
