#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "imgstat/compare.hpp"
#include "imgstat/contrast.hpp"
#include "imgstat/corpus_io.hpp"
#include "imgstat/error.hpp"
#include "imgstat/moments.hpp"
#include "imgstat/parallel.hpp"
#include "imgstat/regions.hpp"
#include "imgstat/spectrum.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace imgstat;

namespace {

using Array2D = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage from_array(const Array2D& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::BadConfig, "expected a 2-D array");
  GrayImage img(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), img.values().begin());
  return img;
}

py::array_t<double> to_array(std::span<const double> v, std::size_t rows, std::size_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SpectrumAxis axis_from(const std::string& s) {
  if (s == "h" || s == "horizontal") return SpectrumAxis::Horizontal;
  if (s == "v" || s == "vertical") return SpectrumAxis::Vertical;
  throw Error(ErrorCode::BadConfig, "axis must be 'h' or 'v'");
}

Spectrum1D spectrum_from(std::vector<double> freqs, std::vector<double> power) {
  Spectrum1D s;
  s.freqs = std::move(freqs);
  s.power = std::move(power);
  return s;
}

}  // namespace

PYBIND11_MODULE(_imgstat, m) {
  m.doc() = "Natural-image statistics core";
  m.attr("__version__") = std::string(kToolVersion);

  // Held for the life of the interpreter.
  static PyObject* exc_type = py::exception<Error>(m, "ImgstatError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(exc_type)(std::string(to_string(e.code())) + ": " + e.what());
      err.attr("code") = std::string(to_string(e.code()));
      err.attr("exit_code") = exit_code_for(e.code());
      PyErr_SetObject(exc_type, err.ptr());
    }
  });

  m.def("welch_t_test", [](std::vector<double> a, std::vector<double> b) {
    const WelchResult r = welch_t_test(a, b);
    return py::dict("t"_a = r.t, "df"_a = r.df, "p"_a = r.p);
  });

  m.def("moment_summary", [](std::vector<double> x) {
    const MomentSummary s = moment_summary(x);
    return py::dict("mean"_a = s.mean, "std"_a = s.std, "skewness"_a = s.skewness, "kurtosis"_a = s.kurtosis);
  });

  m.def(
      "fit_weibull",
      [](std::vector<double> x, std::size_t bins) {
        const WeibullFit f = fit_weibull(x, bins);
        return py::dict("beta"_a = f.beta, "gamma"_a = f.gamma, "kld"_a = f.kld, "zero_fraction"_a = f.zero_fraction,
                        "n_positive"_a = f.n_positive);
      },
      py::arg("samples"), py::arg("bins") = kWeibullDefaultBins);

  m.def(
      "region_areas",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a, std::size_t n_levels,
         int connectivity) {
        if (a.ndim() != 2) throw Error(ErrorCode::BadConfig, "expected a 2-D uint8 array");
        if (connectivity != 4 && connectivity != 8) throw Error(ErrorCode::BadConfig, "connectivity must be 4 or 8");
        LevelImage img(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
        std::copy(a.data(), a.data() + a.size(), img.values().begin());
        return segment_and_count(img, quantile_thresholds(img, n_levels),
                                 connectivity == 4 ? Connectivity::Four : Connectivity::Eight);
      },
      py::arg("levels"), py::arg("n_levels") = 16, py::arg("connectivity") = 8);

  m.def(
      "fit_region_law",
      [](const AreaHistogram& hist, std::size_t s_max) {
        const RegionLawFit f = fit_region_law(hist, s_max);
        return py::dict("K"_a = f.K, "c"_a = f.c, "residual"_a = f.residual, "lattice"_a = f.lattice);
      },
      py::arg("histogram"), py::arg("s_max") = kDefaultSMax);

  m.def(
      "power_law_field",
      [](std::size_t size, double alpha, std::uint64_t seed) {
        const FloatImage f = power_law_field(size, alpha, seed);
        return to_array(f.values(), size, size);
      },
      py::arg("size"), py::arg("alpha") = 2.0, py::arg("seed") = 0);

  m.def("power_spectrum", [](const Array2D& a) {
    const SpectrumGrid g = power_spectrum(from_array(a));
    return to_array(g.power, g.size, g.size);
  });

  m.def(
      "axis_profile",
      [](const Array2D& a, const std::string& axis, const std::string& profile) {
        const Spectrum1D s =
            axis_average(power_spectrum(from_array(a)), axis_from(axis), axis_profile_from_string(profile));
        return py::make_tuple(s.freqs, s.power);
      },
      py::arg("image"), py::arg("axis") = "h", py::arg("profile") = "slice");

  m.def(
      "fit_power_law",
      [](std::vector<double> freqs, std::vector<double> power) {
        const PowerLawFit f = fit_power_law(spectrum_from(std::move(freqs), std::move(power)));
        return py::dict("log_A"_a = f.log_A, "alpha"_a = f.alpha, "residual"_a = f.residual,
                        "n_points"_a = f.n_points);
      },
      py::arg("freqs"), py::arg("power"));

  m.def(
      "detect_spikes",
      [](std::vector<double> freqs, std::vector<double> power, double base_freq, double threshold_db,
         std::size_t window) {
        const SpikeReport r =
            detect_spikes(spectrum_from(std::move(freqs), std::move(power)), base_freq, threshold_db, window);
        return py::dict("spike_freqs"_a = r.spike_freqs, "prominences"_a = r.prominences,
                        "spikiness"_a = r.spikiness);
      },
      py::arg("freqs"), py::arg("power"), py::arg("base_freq") = kDefaultSpikeBaseFreq,
      py::arg("threshold_db") = kDefaultSpikeThresholdDb, py::arg("window") = kDefaultSpikeWindow);

  m.def("default_config_json", [] { return config_to_json(AnalysisConfig{}).dump(); });

  m.def(
      "analyze_json",
      [](const std::string& directory, const std::string& config_json, std::optional<unsigned> threads) {
        AnalysisConfig config = config_from_json(nlohmann::json::parse(config_json));
        config.validate();
        const unsigned n = resolve_threads(threads);
        std::string out;
        {
          py::gil_scoped_release release;
          const CorpusManifest manifest =
              scan_corpus(directory, config.crop_size, config.sample_limit, config.sample_seed);
          out = corpus_stats_to_json(analyze_corpus(manifest, config, n)).dump();
        }
        return out;
      },
      py::arg("directory"), py::arg("config_json"), py::arg("threads") = py::none());

  m.def("compare_json", [](const std::string& a, const std::string& b) {
    const CorpusStats sa = corpus_stats_from_json(nlohmann::json::parse(a));
    const CorpusStats sb = corpus_stats_from_json(nlohmann::json::parse(b));
    return report_to_json(compare_corpora(sa, sb)).dump();
  });
}
