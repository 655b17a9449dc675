#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "imgstat/compare.hpp"
#include "imgstat/format.hpp"

namespace imgstat {

namespace {

using nlohmann::json;

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json();
}

json weibull_json(const WeibullFit& w, double sigma) {
  return json{{"beta", w.beta},
              {"gamma", w.gamma},
              {"kld", w.kld},
              {"zero_fraction", w.zero_fraction},
              {"n_positive", w.n_positive},
              {"sigma", sigma}};
}

json region_json(const RegionLawFit& f) {
  return json{{"K", f.K}, {"c", f.c}, {"residual", f.residual}, {"lattice", f.lattice}};
}

json image_stats_json(const ImageStats& s, double sigma) {
  json filters = json::array();
  for (const auto& k : s.filter_kurtosis) filters.push_back(optional_json(k));
  return json{{"luminance_skewness", optional_json(s.luminance_skewness)},
              {"weibull", s.weibull ? weibull_json(*s.weibull, sigma) : json()},
              {"filter_kurtosis", filters},
              {"region_fit", s.region_fit ? region_json(*s.region_fit) : json()},
              {"spectrum_fit_h", optional_json(s.spectrum_fit_h)},
              {"spectrum_fit_v", optional_json(s.spectrum_fit_v)},
              {"flags", s.flags}};
}

PowerLawFit power_fit_from(const json& j) {
  return PowerLawFit{j.at("log_A").get<double>(), j.at("alpha").get<double>(), j.at("residual").get<double>(),
                     j.at("n_points").get<std::size_t>()};
}

template <typename T, typename Fn>
std::optional<T> optional_from(const json& j, Fn&& fn) {
  if (j.is_null()) return std::nullopt;
  return fn(j);
}

ImageStats image_stats_from(const json& j) {
  ImageStats s;
  if (!j.at("luminance_skewness").is_null()) s.luminance_skewness = j.at("luminance_skewness").get<double>();
  s.weibull = optional_from<WeibullFit>(j.at("weibull"), [](const json& w) {
    return WeibullFit{w.at("beta").get<double>(), w.at("gamma").get<double>(), w.at("kld").get<double>(),
                      w.at("zero_fraction").get<double>(), w.at("n_positive").get<std::size_t>()};
  });
  for (const auto& k : j.at("filter_kurtosis")) {
    s.filter_kurtosis.push_back(k.is_null() ? std::nullopt : std::optional<double>(k.get<double>()));
  }
  s.region_fit = optional_from<RegionLawFit>(j.at("region_fit"), [](const json& r) {
    return RegionLawFit{r.at("K").get<double>(), r.at("c").get<double>(), r.at("residual").get<double>(),
                        r.at("lattice").get<std::size_t>()};
  });
  s.spectrum_fit_h = optional_from<PowerLawFit>(j.at("spectrum_fit_h"), power_fit_from);
  s.spectrum_fit_v = optional_from<PowerLawFit>(j.at("spectrum_fit_v"), power_fit_from);
  s.flags = j.at("flags").get<std::vector<std::string>>();
  return s;
}

SpikeReport spikes_from(const json& j) {
  SpikeReport r;
  r.base_freq = j.at("base_freq").get<double>();
  r.threshold_db = j.at("threshold_db").get<double>();
  r.spike_freqs = j.at("spike_freqs").get<std::vector<double>>();
  r.prominences = j.at("prominences").get<std::vector<double>>();
  r.spikiness = j.at("spikiness").get<double>();
  return r;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

json corpus_stats_to_json(const CorpusStats& s) {
  json images = json::array();
  for (const auto& rec : s.images) {
    images.push_back(json{{"path", rec.path}, {"stats", image_stats_json(rec.stats, s.config.sigma)}});
  }
  json failures = json::array();
  for (const auto& f : s.failures) failures.push_back(json{{"path", f.path}, {"reason", f.reason}});
  json areas = json::array();
  for (const auto& [size, count] : s.area_histogram) areas.push_back(json::array({size, count}));

  json degenerate = json::object();
  const auto names = statistic_names(s.config.filters().size());
  for (std::size_t row = 0; row < names.size(); ++row) {
    degenerate[names[row]] = s.images.size() - s.samples(row).size();
  }

  return json{
      {"schema", s.schema},
      {"tool_version", s.tool_version},
      {"config", config_to_json(s.config)},
      {"manifest", s.manifest},
      {"images", images},
      {"failures", failures},
      {"excluded_counts", degenerate},
      {"histograms",
       {{"luminance", s.luminance_histogram}, {"contrast", s.contrast_histogram}, {"filters", s.filter_histograms}}},
      {"area_histogram", areas},
      {"spectrum", {{"horizontal", s.spectrum_h}, {"vertical", s.spectrum_v}}},
      {"mean_spectrum_fit", {{"horizontal", optional_json(s.mean_fit_h)}, {"vertical", optional_json(s.mean_fit_v)}}},
      {"spikes", {{"horizontal", optional_json(s.spikes_h)}, {"vertical", optional_json(s.spikes_v)}}},
  };
}

CorpusStats corpus_stats_from_json(const json& j) {
  CorpusStats s;
  try {
    s.schema = j.at("schema").get<std::string>();
    if (s.schema != kCorpusStatsSchema) {
      throw Error(ErrorCode::ParseError, "unsupported schema '" + s.schema + "'");
    }
    s.tool_version = j.at("tool_version").get<std::string>();
    s.config = config_from_json(j.at("config"));
    s.manifest = j.at("manifest").get<CorpusManifest>();
    for (const auto& rec : j.at("images")) {
      s.images.push_back({rec.at("path").get<std::string>(), image_stats_from(rec.at("stats"))});
    }
    for (const auto& f : j.at("failures")) {
      s.failures.push_back({f.at("path").get<std::string>(), f.at("reason").get<std::string>()});
    }
    const auto& h = j.at("histograms");
    s.luminance_histogram = h.at("luminance").get<Histogram>();
    s.contrast_histogram = h.at("contrast").get<Histogram>();
    s.filter_histograms = h.at("filters").get<std::vector<Histogram>>();
    for (const auto& a : j.at("area_histogram")) s.area_histogram[a.at(0).get<std::size_t>()] = a.at(1).get<double>();
    s.spectrum_h = j.at("spectrum").at("horizontal").get<Spectrum1D>();
    s.spectrum_v = j.at("spectrum").at("vertical").get<Spectrum1D>();
    const auto& mf = j.at("mean_spectrum_fit");
    s.mean_fit_h = optional_from<PowerLawFit>(mf.at("horizontal"), power_fit_from);
    s.mean_fit_v = optional_from<PowerLawFit>(mf.at("vertical"), power_fit_from);
    s.spikes_h = optional_from<SpikeReport>(j.at("spikes").at("horizontal"), spikes_from);
    s.spikes_v = optional_from<SpikeReport>(j.at("spikes").at("vertical"), spikes_from);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed corpus statistics: ") + e.what());
  }
  return s;
}

ComparisonReport compare_corpora(const CorpusStats& a, const CorpusStats& b) {
  const auto diff = config_differences(a.config, b.config);
  if (!diff.empty()) {
    std::string fields;
    for (const auto& d : diff) fields += (fields.empty() ? "" : ", ") + d;
    throw Error(ErrorCode::ConfigMismatch, "analysis settings differ: " + fields);
  }

  ComparisonReport report;
  report.config = config_to_json(a.config);
  report.config.erase("sample_seed");
  report.config.erase("sample_limit");
  report.digest_a = a.manifest.digest();
  report.digest_b = b.manifest.digest();

  const auto names = statistic_names(a.config.filters().size());
  double p_sum = 0.0;
  std::size_t p_count = 0;
  for (std::size_t row = 0; row < names.size(); ++row) {
    ComparisonRow r;
    r.name = names[row];
    const auto xa = a.samples(row);
    const auto xb = b.samples(row);
    r.n_a = xa.size();
    r.n_b = xb.size();
    r.mean_a = mean_of(xa);
    r.mean_b = mean_of(xb);
    try {
      const auto w = welch_t_test(xa, xb);
      r.t_stat = w.t;
      r.p_value = w.p;
      r.df = w.df;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSample) throw;
      // Zero-variance groups: identical constants are indistinguishable,
      // anything else is left untested.
      const bool constant = xa.size() >= 1 && xb.size() >= 1 &&
                            std::all_of(xa.begin(), xa.end(), [&](double v) { return v == xa.front(); }) &&
                            std::all_of(xb.begin(), xb.end(), [&](double v) { return v == xa.front(); });
      if (constant) {
        r.t_stat = 0.0;
        r.p_value = 1.0;
        r.note = "identical constant samples";
      } else {
        r.note = std::string("not tested: ") + e.what();
      }
    }
    if (r.p_value) {
      p_sum += *r.p_value;
      ++p_count;
    }
    report.rows.push_back(std::move(r));
  }

  std::vector<std::size_t> order(report.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double px = report.rows[x].p_value.value_or(-1.0);
    const double py = report.rows[y].p_value.value_or(-1.0);
    return px > py;
  });
  for (std::size_t i : order) report.ranking.push_back(report.rows[i].name);
  report.mean_p = p_count ? p_sum / static_cast<double>(p_count) : 0.0;
  return report;
}

json report_to_json(const ComparisonReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"name", row.name},
                        {"mean_a", std::isfinite(row.mean_a) ? json(row.mean_a) : json()},
                        {"mean_b", std::isfinite(row.mean_b) ? json(row.mean_b) : json()},
                        {"n_a", row.n_a},
                        {"n_b", row.n_b},
                        {"t_stat", optional_json(row.t_stat)},
                        {"p_value", optional_json(row.p_value)},
                        {"df", optional_json(row.df)},
                        {"note", row.note}});
  }
  return json{{"schema", r.schema},
              {"tool_version", r.tool_version},
              {"config", r.config},
              {"corpus_a", r.digest_a},
              {"corpus_b", r.digest_b},
              {"compatibility", r.compatibility},
              {"rows", rows},
              {"ranking", r.ranking},
              {"ranking_note", "statistics ordered by p-value; larger p means corpus B is more similar to A"},
              {"aggregate_mean_p", r.mean_p},
              {"aggregate_note", "unweighted mean of p-values; heuristic only"}};
}

std::string report_table(const ComparisonReport& r) {
  auto num = [](std::optional<double> v, const char* fmt) {
    if (!v || !std::isfinite(*v)) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  std::size_t name_w = 9;
  for (const auto& row : r.rows) name_w = std::max(name_w, row.name.size());

  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %12s %12s %7s %7s %10s %10s\n", static_cast<int>(name_w), "statistic",
                "mean_a", "mean_b", "n_a", "n_b", "t-stat", "p-value");
  os << line;
  os << std::string(name_w + 12 * 2 + 7 * 2 + 10 * 2 + 6, '-') << '\n';
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-*s %12s %12s %7zu %7zu %10s %10s\n", static_cast<int>(name_w),
                  row.name.c_str(), num(row.mean_a, "%.4g").c_str(), num(row.mean_b, "%.4g").c_str(), row.n_a,
                  row.n_b, num(row.t_stat, "%.2f").c_str(), num(row.p_value, "%.2f").c_str());
    os << line;
  }
  os << "\nranking (most similar first): ";
  for (std::size_t i = 0; i < r.ranking.size(); ++i) os << (i ? ", " : "") << r.ranking[i];
  os << "\naggregate mean p (heuristic): " << num(r.mean_p, "%.3f") << '\n';
  return os.str();
}

}  // namespace imgstat
