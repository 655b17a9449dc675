#include <cmath>
#include <cstdio>

#include "imgstat/compare.hpp"
#include "imgstat/format.hpp"
#include "imgstat/random.hpp"

namespace imgstat {

namespace {

std::string filter_digest(const std::vector<RandomFilter>& filters) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : filters) {
    mix(std::to_string(f.side));
    for (double w : f.kernel.weights) mix(format_double(w));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::vector<RandomFilter> AnalysisConfig::filters() const {
  if (imported_filters) return *imported_filters;
  return make_filter_battery(filter_count, filter_side, filter_seed);
}

void AnalysisConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  if (crop_size < 16) bad("crop_size must be at least 16");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::BadSigma, "sigma must be positive");
  if (2 * static_cast<std::size_t>(std::ceil(3.0 * sigma)) + 1 > crop_size) {
    throw Error(ErrorCode::BadSigma, "derivative kernel larger than the crop");
  }
  if (n_levels < 2 || n_levels > 256) bad("n_levels must be in [2, 256]");
  if (s_max < 3) bad("s_max must be at least 3");
  if (filter_count == 0 && !imported_filters) bad("filter_count must be positive");
  if (filter_side < 2 || filter_side > crop_size) throw Error(ErrorCode::BadSide, "filter side out of range");
  if (luminance_bins == 0 || contrast_bins == 0 || filter_bins == 0 || weibull_bins == 0) {
    bad("bin counts must be positive");
  }
  if (!(luminance_max > 0.0)) bad("luminance_max must be positive");
  if (!(contrast_quantile > 0.0 && contrast_quantile <= 1.0)) bad("contrast_quantile must be in (0, 1]");
  if (!(filter_quantile > 0.0 && filter_quantile <= 1.0)) bad("filter_quantile must be in (0, 1]");
  if (spike_window == 0) bad("spike_window must be positive");
  const double bins = spike_base_freq * static_cast<double>(crop_size);
  if (!(spike_base_freq > 0.0) || std::abs(bins - std::round(bins)) > 1e-9 || bins > crop_size / 2.0) {
    throw Error(ErrorCode::BaseFreqOffGrid, "spike base frequency is not on the crop's frequency grid");
  }
}

nlohmann::json config_to_json(const AnalysisConfig& c) {
  const auto battery = c.filters();
  const double n = static_cast<double>(c.crop_size);
  nlohmann::json j{
      {"crop_size", c.crop_size},
      {"sigma", c.sigma},
      {"kernel_radius", static_cast<std::size_t>(std::ceil(3.0 * c.sigma))},
      {"border", "reflect101"},
      {"color_scale", "rgb-0-255"},
      {"n_levels", c.n_levels},
      {"connectivity", static_cast<int>(c.connectivity)},
      {"gray_quantization", "round-half-up"},
      {"s_max", c.s_max},
      {"filter_seed", c.filter_seed},
      {"filter_count", battery.size()},
      {"filter_side", c.filter_side},
      {"filter_source", c.imported_filters ? "file" : "seed"},
      {"filter_digest", filter_digest(battery)},
      {"filter_convolution", "valid"},
      {"prng", std::string(kPrngName)},
      {"luminance_bins", c.luminance_bins},
      {"luminance_max", c.luminance_max},
      {"contrast_bins", c.contrast_bins},
      {"contrast_quantile", c.contrast_quantile},
      {"filter_bins", c.filter_bins},
      {"filter_quantile", c.filter_quantile},
      {"weibull_bins", c.weibull_bins},
      {"kl_epsilon", kKlEpsilon},
      {"spike_base_freq", c.spike_base_freq},
      {"spike_threshold_db", c.spike_threshold_db},
      {"spike_window", c.spike_window},
      {"axis_profile", to_string(c.axis_profile)},
      {"fft_window", "none"},
      {"fit_f_min", 2.0 / n},
      {"fit_f_max", 0.5 - 2.0 / n},
      {"sample_seed", c.sample_seed},
      {"sample_limit", c.sample_limit ? nlohmann::json(*c.sample_limit) : nlohmann::json()},
  };
  if (c.imported_filters) j["filters"] = *c.imported_filters;
  return j;
}

AnalysisConfig config_from_json(const nlohmann::json& j) {
  AnalysisConfig c;
  try {
    c.crop_size = j.at("crop_size").get<std::size_t>();
    c.sigma = j.at("sigma").get<double>();
    c.n_levels = j.at("n_levels").get<std::size_t>();
    c.connectivity = j.at("connectivity").get<int>() == 4 ? Connectivity::Four : Connectivity::Eight;
    c.s_max = j.at("s_max").get<std::size_t>();
    c.filter_seed = j.at("filter_seed").get<std::uint64_t>();
    c.filter_count = j.at("filter_count").get<std::size_t>();
    c.filter_side = j.at("filter_side").get<std::size_t>();
    if (j.contains("filters")) c.imported_filters = j.at("filters").get<std::vector<RandomFilter>>();
    c.luminance_bins = j.at("luminance_bins").get<std::size_t>();
    c.luminance_max = j.at("luminance_max").get<double>();
    c.contrast_bins = j.at("contrast_bins").get<std::size_t>();
    c.contrast_quantile = j.at("contrast_quantile").get<double>();
    c.filter_bins = j.at("filter_bins").get<std::size_t>();
    c.filter_quantile = j.at("filter_quantile").get<double>();
    c.weibull_bins = j.at("weibull_bins").get<std::size_t>();
    c.spike_base_freq = j.at("spike_base_freq").get<double>();
    c.spike_threshold_db = j.at("spike_threshold_db").get<double>();
    c.spike_window = j.at("spike_window").get<std::size_t>();
    c.axis_profile = axis_profile_from_string(j.at("axis_profile").get<std::string>());
    c.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    if (!j.at("sample_limit").is_null()) c.sample_limit = j.at("sample_limit").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad config snapshot: ") + e.what());
  }
  return c;
}

std::vector<std::string> config_differences(const AnalysisConfig& a, const AnalysisConfig& b) {
  const auto ja = config_to_json(a);
  const auto jb = config_to_json(b);
  // Identical filter weights make the battery's source irrelevant.
  const bool same_filters = ja.at("filter_digest") == jb.at("filter_digest");
  auto ignored = [&](const std::string& key) {
    if (key == "sample_seed" || key == "sample_limit" || key == "filters") return true;
    return same_filters && (key == "filter_seed" || key == "filter_source");
  };
  std::vector<std::string> diff;
  for (const auto& [key, value] : ja.items()) {
    if (ignored(key)) continue;
    if (!jb.contains(key) || jb.at(key) != value) diff.push_back(key);
  }
  for (const auto& [key, value] : jb.items()) {
    if (!ignored(key) && !ja.contains(key)) diff.push_back(key);
  }
  return diff;
}

std::vector<std::string> statistic_names(std::size_t filter_count) {
  std::vector<std::string> names{"luminance_skewness", "weibull_beta", "weibull_gamma", "weibull_kld"};
  for (std::size_t i = 0; i < filter_count; ++i) names.push_back("filter" + std::to_string(i + 1) + "_kurtosis");
  for (const char* n : {"region_K", "region_c", "region_residual", "spectrum_h_logA", "spectrum_h_alpha",
                        "spectrum_h_residual", "spectrum_v_logA", "spectrum_v_alpha", "spectrum_v_residual"}) {
    names.emplace_back(n);
  }
  return names;
}

std::optional<double> statistic_value(const ImageStats& s, std::size_t row) {
  if (row == 0) return s.luminance_skewness;
  if (row <= 3) {
    if (!s.weibull) return std::nullopt;
    return row == 1 ? s.weibull->beta : row == 2 ? s.weibull->gamma : s.weibull->kld;
  }
  row -= 4;
  if (row < s.filter_kurtosis.size()) return s.filter_kurtosis[row];
  row -= s.filter_kurtosis.size();
  if (row < 3) {
    if (!s.region_fit) return std::nullopt;
    return row == 0 ? s.region_fit->K : row == 1 ? s.region_fit->c : s.region_fit->residual;
  }
  row -= 3;
  if (row < 6) {
    const auto& fit = row < 3 ? s.spectrum_fit_h : s.spectrum_fit_v;
    if (!fit) return std::nullopt;
    switch (row % 3) {
      case 0: return fit->log_A;
      case 1: return fit->alpha;
      default: return fit->residual;
    }
  }
  return std::nullopt;
}

}  // namespace imgstat
