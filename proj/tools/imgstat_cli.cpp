// imgstat command-line front end.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imgstat/compare.hpp"
#include "imgstat/corpus_io.hpp"
#include "imgstat/error.hpp"
#include "imgstat/format.hpp"
#include "imgstat/parallel.hpp"
#include "imgstat/random.hpp"
#include "imgstat/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace imgstat;

namespace {

constexpr std::string_view kFiltersSchema = "imgstat.filters/1";

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

// "out/stats.json" -> "out/stats"
fs::path stem_of(const fs::path& out) {
  fs::path p = out;
  if (p.extension() == ".json") p.replace_extension();
  return p;
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  return fs::path(stem_of(out).string() + "." + suffix);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::vector<RandomFilter> load_filters(const fs::path& path) {
  const json j = read_json(path);
  try {
    if (j.at("schema").get<std::string>() != kFiltersSchema) {
      throw Error(ErrorCode::ParseError, path.string() + ": not a filter battery file");
    }
    auto filters = j.at("filters").get<std::vector<RandomFilter>>();
    if (filters.empty()) throw Error(ErrorCode::BadConfig, path.string() + ": empty filter battery");
    return filters;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

json filters_document(const std::vector<RandomFilter>& filters) {
  return json{{"schema", kFiltersSchema},
              {"tool_version", kToolVersion},
              {"prng", kPrngName},
              {"filters", filters}};
}

struct ConfigFlags {
  AnalysisConfig config;
  int connectivity = 8;
  std::string axis_profile = "slice";
  std::string filters_file;
  std::size_t limit = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--crop", config.crop_size, "Centre-crop side in pixels")->capture_default_str();
    cmd->add_option("--sigma", config.sigma, "Gaussian derivative scale")->capture_default_str();
    cmd->add_option("--levels", config.n_levels, "Quantile gray levels for regions")->capture_default_str();
    cmd->add_option("--connectivity", connectivity, "Region connectivity (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();
    cmd->add_option("--s-max", config.s_max, "Largest region area (exclusive) in the fit")->capture_default_str();
    cmd->add_option("--filter-seed", config.filter_seed, "Base seed of the random filter battery")
        ->capture_default_str();
    cmd->add_option("--filter-count", config.filter_count, "Number of random filters")->capture_default_str();
    cmd->add_option("--filter-side", config.filter_side, "Random filter side")->capture_default_str();
    cmd->add_option("--filters", filters_file, "Use a battery exported by filters-export");
    cmd->add_option("--luminance-bins", config.luminance_bins)->capture_default_str();
    cmd->add_option("--luminance-max", config.luminance_max)->capture_default_str();
    cmd->add_option("--contrast-bins", config.contrast_bins)->capture_default_str();
    cmd->add_option("--filter-bins", config.filter_bins)->capture_default_str();
    cmd->add_option("--weibull-bins", config.weibull_bins)->capture_default_str();
    cmd->add_option("--spike-base", config.spike_base_freq, "Comb base frequency, cycles/pixel")
        ->capture_default_str();
    cmd->add_option("--spike-threshold", config.spike_threshold_db, "Spike threshold in dB")->capture_default_str();
    cmd->add_option("--spike-window", config.spike_window, "Moving-median window in bins")->capture_default_str();
    cmd->add_option("--axis-profile", axis_profile, "slice or marginal")
        ->check(CLI::IsMember({"slice", "marginal"}))
        ->capture_default_str();
    cmd->add_option("--limit", limit, "Analyse a seeded random subset of this size");
    cmd->add_option("--seed", config.sample_seed, "Sampling seed for --limit")->capture_default_str();
  }

  AnalysisConfig finish() {
    config.connectivity = connectivity == 4 ? Connectivity::Four : Connectivity::Eight;
    config.axis_profile = axis_profile_from_string(axis_profile);
    if (limit > 0) config.sample_limit = limit;
    if (!filters_file.empty()) {
      config.imported_filters = load_filters(filters_file);
      config.filter_count = config.imported_filters->size();
      config.filter_side = config.imported_filters->front().side;
    }
    config.validate();
    return config;
  }
};

std::string areas_csv(const std::map<std::size_t, double>& areas) {
  std::string s = "s,count\n";
  for (const auto& [size, count] : areas) s += std::to_string(size) + "," + format_double(count) + "\n";
  return s;
}

int cmd_analyze(const fs::path& dir, const fs::path& out, ConfigFlags& flags, unsigned threads) {
  const AnalysisConfig config = flags.finish();
  const CorpusManifest manifest = scan_corpus(dir, config.crop_size, config.sample_limit, config.sample_seed);
  const CorpusStats stats = analyze_corpus(manifest, config, threads);
  for (const auto& f : stats.failures) {
    std::cerr << json{{"warning", "skipped"}, {"path", f.path}, {"reason", f.reason}}.dump() << "\n";
  }

  ensure_parent(out);
  write_text_file(sidecar(out, "luminance.csv"), histogram_csv(stats.luminance_histogram));
  write_text_file(sidecar(out, "contrast.csv"), histogram_csv(stats.contrast_histogram));
  for (std::size_t i = 0; i < stats.filter_histograms.size(); ++i) {
    write_text_file(sidecar(out, "filter" + std::to_string(i + 1) + ".csv"), histogram_csv(stats.filter_histograms[i]));
  }
  write_text_file(sidecar(out, "areas.csv"), areas_csv(stats.area_histogram));
  write_text_file(sidecar(out, "spectrum_h.csv"), spectrum_csv(stats.spectrum_h));
  write_text_file(sidecar(out, "spectrum_v.csv"), spectrum_csv(stats.spectrum_v));
  write_text_file(out, dump(corpus_stats_to_json(stats)));
  std::cerr << json{{"analyzed", stats.images.size()}, {"failed", stats.failures.size()}, {"out", out.string()}}.dump()
            << "\n";
  return 0;
}

int cmd_compare(const fs::path& a_path, const fs::path& b_path, const fs::path& out) {
  const CorpusStats a = corpus_stats_from_json(read_json(a_path));
  const CorpusStats b = corpus_stats_from_json(read_json(b_path));
  const ComparisonReport report = compare_corpora(a, b);
  const std::string table = report_table(report);
  if (!out.empty()) {
    ensure_parent(out);
    write_text_file(sidecar(out, "txt"), table);
    write_text_file(out, dump(report_to_json(report)));
  }
  std::cout << table;
  return 0;
}

struct SynthFlags {
  std::string kind;
  fs::path out;
  std::size_t count = 1;
  std::size_t size = 128;
  std::uint64_t seed = 0;
  std::size_t layers = 5;
  std::size_t stride = 2;
  std::size_t kernel_side = 4;
  std::size_t trials = 200;
  double alpha = 2.0;
  double amplitude = 0.5;
  double contrast = 40.0;
};

std::string numbered(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%05zu.png", i);
  return prefix + buf;
}

int cmd_synth(const SynthFlags& s, unsigned threads) {
  if (s.size < 2) throw Error(ErrorCode::BadConfig, "--size must be at least 2");
  if (s.count == 0) throw Error(ErrorCode::BadConfig, "--count must be positive");
  fs::create_directories(s.out);
  json meta{{"kind", s.kind}, {"size", s.size}, {"seed", s.seed}, {"tool_version", kToolVersion}, {"prng", kPrngName}};

  if (s.kind == "f2noise" || s.kind == "comb") {
    if (s.kind == "comb" && (std::size_t{1} << 5) > s.size) {
      throw Error(ErrorCode::PeriodExceedsImage, "comb needs --size of at least 32");
    }
    parallel_for(s.count, threads, [&](std::size_t i, unsigned) {
      const std::uint64_t seed = derive_seed(s.seed, i);
      const FloatImage f = s.kind == "comb" ? comb_field(s.size, s.alpha, seed, s.amplitude)
                                            : power_law_field(s.size, s.alpha, seed);
      save_png(s.out / numbered(s.kind, i), render_gray(f, s.contrast));
    });
    meta["count"] = s.count;
    meta["alpha"] = s.alpha;
    meta["contrast"] = s.contrast;
    if (s.kind == "comb") meta["amplitude"] = s.amplitude;
  } else if (s.kind == "impulse_pattern") {
    if (s.layers < 2) throw Error(ErrorCode::BadConfig, "--layers must be at least 2");
    // Integer gray steps keep the PNG exact: each grid adds `step` levels.
    const double step = std::floor(255.0 / static_cast<double>(s.layers - 1));
    const std::vector<double> amps(s.layers - 1, step);
    save_png(s.out / "impulse_pattern.png", impulse_pattern(s.size, s.layers, amps));
    meta["layers"] = s.layers;
    meta["gray_step"] = step;
  } else if (s.kind == "deconv_chain") {
    DeconvChainConfig cfg;
    cfg.layers = s.layers;
    cfg.stride = s.stride;
    cfg.kernel_side = s.kernel_side;
    cfg.trials = s.trials;
    cfg.seed = s.seed;
    cfg.render_size = s.size;
    const DeconvChainResult r = simulate_deconv_chain(cfg);
    auto v = r.mean_image.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    GrayImage img(r.mean_image.width(), r.mean_image.height(), 128.0);
    if (*hi > *lo) {
      for (std::size_t i = 0; i < v.size(); ++i) img.values()[i] = 255.0 * (v[i] - *lo) / (*hi - *lo);
    }
    save_png(s.out / "deconv_chain.png", img);
    write_text_file(s.out / "deconv_chain.spectrum.csv", spectrum_csv(r.mean_spectrum));
    const SpikeReport spikes = detect_spikes(r.mean_spectrum, kDefaultSpikeBaseFreq * 128.0 / static_cast<double>(s.size));
    write_text_file(s.out / "deconv_chain.spikes.json", dump(json(spikes)));
    meta["layers"] = s.layers;
    meta["stride"] = s.stride;
    meta["kernel_side"] = s.kernel_side;
    meta["trials"] = s.trials;
    meta["native_size"] = r.native_size;
  } else {
    throw Error(ErrorCode::BadConfig, "unknown synth kind '" + s.kind + "'");
  }
  write_text_file(s.out / (s.kind + ".meta.json"), dump(meta));
  return 0;
}

int cmd_filters_export(const fs::path& out, std::size_t count, std::size_t side, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::BadConfig, "--filter-count must be positive");
  const auto filters = make_filter_battery(count, side, seed);
  const std::string text = dump(filters_document(filters));
  if (out.empty()) {
    std::cout << text;
  } else {
    ensure_parent(out);
    write_text_file(out, text);
  }
  return 0;
}

int cmd_filters_import(const fs::path& in, const fs::path& out) {
  const auto filters = load_filters(in);
  AnalysisConfig c;
  c.imported_filters = filters;
  c.filter_count = filters.size();
  c.filter_side = filters.front().side;
  const json cfg = config_to_json(c);
  json summary{{"filters", filters.size()},
               {"side", filters.front().side},
               {"seeds", json::array()},
               {"filter_digest", cfg.at("filter_digest")},
               {"valid", true}};
  for (const auto& f : filters) summary["seeds"].push_back(f.seed);
  if (!out.empty()) {
    ensure_parent(out);
    write_text_file(out, dump(filters_document(filters)));
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int report_error(std::string_view code, const std::string& message, int exit_code) {
  std::cerr << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-image statistics for image corpora"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::optional<unsigned> threads_flag;
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads_flag, "Worker threads (default: IMGSTAT_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "Compute corpus statistics for a directory of images");
  fs::path analyze_dir, analyze_out;
  ConfigFlags config_flags;
  analyze->add_option("dir", analyze_dir, "Corpus root")->required();
  analyze->add_option("--out", analyze_out, "Statistics JSON path")->required();
  config_flags.attach(analyze);
  add_threads(analyze);

  auto* compare = app.add_subcommand("compare", "Welch t-tests between two analysed corpora");
  fs::path stats_a, stats_b, compare_out;
  compare->add_option("a", stats_a, "Statistics JSON of corpus A")->required();
  compare->add_option("b", stats_b, "Statistics JSON of corpus B")->required();
  compare->add_option("--out", compare_out, "Report JSON path (a .txt table is written beside it)");

  auto* synth = app.add_subcommand("synth", "Write synthetic test images");
  SynthFlags sf;
  synth->add_option("kind", sf.kind, "f2noise | comb | impulse_pattern | deconv_chain")
      ->required()
      ->check(CLI::IsMember({"f2noise", "comb", "impulse_pattern", "deconv_chain"}));
  synth->add_option("--out", sf.out, "Output directory")->required();
  synth->add_option("--count", sf.count)->capture_default_str();
  synth->add_option("--size", sf.size)->capture_default_str();
  synth->add_option("--seed", sf.seed)->capture_default_str();
  synth->add_option("--layers", sf.layers)->capture_default_str();
  synth->add_option("--stride", sf.stride)->capture_default_str();
  synth->add_option("--kernel-side", sf.kernel_side)->capture_default_str();
  synth->add_option("--trials", sf.trials)->capture_default_str();
  synth->add_option("--alpha", sf.alpha, "Spectral exponent of the noise field")->capture_default_str();
  synth->add_option("--amplitude", sf.amplitude, "Comb strength in field standard deviations")
      ->capture_default_str();
  synth->add_option("--contrast", sf.contrast, "Gray levels per field standard deviation")->capture_default_str();
  add_threads(synth);

  auto* fexport = app.add_subcommand("filters-export", "Write a random filter battery as JSON");
  fs::path export_out;
  std::size_t export_count = kDefaultFilterCount, export_side = kDefaultFilterSide;
  std::uint64_t export_seed = kDefaultFilterSeed;
  fexport->add_option("--out", export_out, "Output path (stdout if omitted)");
  fexport->add_option("--filter-count", export_count)->capture_default_str();
  fexport->add_option("--filter-side", export_side)->capture_default_str();
  fexport->add_option("--filter-seed", export_seed)->capture_default_str();

  auto* fimport = app.add_subcommand("filters-import", "Validate a filter battery file");
  fs::path import_in, import_out;
  fimport->add_option("file", import_in, "Battery JSON")->required();
  fimport->add_option("--out", import_out, "Write a normalized copy here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("UsageError", e.what(), 3);
  }

  try {
    const unsigned threads = resolve_threads(threads_flag);
    if (*analyze) return cmd_analyze(analyze_dir, analyze_out, config_flags, threads);
    if (*compare) return cmd_compare(stats_a, stats_b, compare_out);
    if (*synth) return cmd_synth(sf, threads);
    if (*fexport) return cmd_filters_export(export_out, export_count, export_side, export_seed);
    if (*fimport) return cmd_filters_import(import_in, import_out);
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.what(), exit_code_for(e.code()));
  } catch (const fs::filesystem_error& e) {
    return report_error("IoError", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what(), 4);
  }
  return 4;
}
