#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "imgstat/image.hpp"

namespace imgstat {

// Squared DFT magnitude of a mean-subtracted square image, unnormalized
// (sum(power) / size^2 == sum((x - mean)^2)), shifted so DC sits at
// (size/2, size/2).
struct SpectrumGrid {
  std::size_t size = 0;
  std::vector<double> power;  // row = vertical frequency, col = horizontal

  double at(std::size_t row, std::size_t col) const { return power[row * size + col]; }
  // Power at signed integer frequencies (ky, kx) in cycles per image.
  double at_frequency(long ky, long kx) const;
};

struct Spectrum1D {
  std::vector<double> freqs;  // cycles/pixel, strictly increasing in (0, 0.5]
  std::vector<double> power;

  friend bool operator==(const Spectrum1D&, const Spectrum1D&) = default;
};

enum class SpectrumAxis { Horizontal, Vertical };

// How the 1-D profile along an axis is formed.
//  Slice:    power on the axis itself (orthogonal frequency 0).
//  Marginal: arithmetic mean over every orthogonal frequency.
// For an isotropic f^-a field the slice keeps exponent a while the
// marginal flattens it to roughly a - 1.
enum class AxisProfile { Slice, Marginal };

std::string to_string(AxisProfile p);
AxisProfile axis_profile_from_string(const std::string& s);

struct PowerLawFit {
  double log_A = 0.0;  // natural-log intercept
  double alpha = 0.0;  // S(f) = A f^-alpha
  double residual = 0.0;
  std::size_t n_points = 0;
};

struct SpikeReport {
  double base_freq = 0.0;
  double threshold_db = 0.0;
  std::vector<double> spike_freqs;
  std::vector<double> prominences;  // dB above the moving-median baseline
  double spikiness = 0.0;           // max excess at multiples of base_freq
};

inline constexpr std::size_t kDefaultSpikeWindow = 9;
inline constexpr double kDefaultSpikeThresholdDb = 6.0;
inline constexpr double kDefaultSpikeBaseFreq = 4.0 / 128.0;

SpectrumGrid power_spectrum(const GrayImage& gray);

Spectrum1D axis_average(const SpectrumGrid& grid, SpectrumAxis axis,
                        AxisProfile profile = AxisProfile::Slice);

// Default fit band [2/size, 0.5 - 2/size].
PowerLawFit fit_power_law(const Spectrum1D& spec, double f_min, double f_max);
PowerLawFit fit_power_law(const Spectrum1D& spec);

SpikeReport detect_spikes(const Spectrum1D& spec, double base_freq,
                          double threshold_db = kDefaultSpikeThresholdDb,
                          std::size_t window = kDefaultSpikeWindow);

// Superposed 2-D impulse grids with periods 2, 4, ..., 2^(L-1); grid k has
// amplitude amplitudes[k-1]. Zero background.
GrayImage impulse_pattern(std::size_t size, std::size_t layers, std::span<const double> amplitudes);

struct DeconvChainConfig {
  std::size_t layers = 5;
  std::size_t stride = 2;
  std::size_t kernel_side = 4;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::size_t render_size = 128;
  SpectrumAxis axis = SpectrumAxis::Horizontal;
  AxisProfile profile = AxisProfile::Slice;
};

struct DeconvChainResult {
  FloatImage mean_image;  // render_size x render_size
  Spectrum1D mean_spectrum;
  std::size_t native_size = 0;  // stride^layers before periodic tiling
};

// Linear chain of transposed convolutions from a 1x1 U[0,1) input: each
// layer inserts stride-1 zeros between units and applies a per-layer
// random kernel with circular padding. The per-layer kernels are fixed by
// the seed; only the input varies over trials. The periodic output is
// tiled to render_size, which stride^layers must divide.
DeconvChainResult simulate_deconv_chain(const DeconvChainConfig& config);

// Gaussian random field with isotropic power |f|^-alpha (DC removed),
// standardized to zero mean and unit variance.
FloatImage power_law_field(std::size_t size, double alpha, std::uint64_t seed);

// Power-law field plus a zero-mean impulse comb with periods 2 .. 2^(layers-1)
// scaled by `amplitude` (field units). With layers = 6 the comb sits at
// multiples of 1/32 cycles/pixel.
FloatImage comb_field(std::size_t size, double alpha, std::uint64_t seed, double amplitude,
                      std::size_t layers = 6);

// 8-bit-range rendering: 128 + contrast * field, clamped to [0, 255].
GrayImage render_gray(const FloatImage& field, double contrast = 40.0, double offset = 128.0);

void to_json(nlohmann::json& j, const Spectrum1D& s);
void from_json(const nlohmann::json& j, Spectrum1D& s);
void to_json(nlohmann::json& j, const SpikeReport& r);
void to_json(nlohmann::json& j, const PowerLawFit& f);
// Columns: freq,power
std::string spectrum_csv(const Spectrum1D& s);

}  // namespace imgstat
