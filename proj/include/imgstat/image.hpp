#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "imgstat/error.hpp"

namespace imgstat {

// Dense row-major raster. Width and height are both at least 1 for any
// raster produced by the library; a default-constructed raster is empty.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {
    if (width == 0 || height == 0) {
      throw Error(ErrorCode::BadConfig, "raster dimensions must be positive");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * width_, width_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * width_, width_}; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Raster<Rgb>;
// Luma-level real values, nominally in [0,255].
using GrayImage = Raster<double>;
// Real-valued derived map (normalized luminance, contrast, filter output).
using FloatImage = Raster<double>;

// Three co-registered opponent-colour planes.
struct TriChannelImage {
  std::array<FloatImage, 3> planes;

  std::size_t width() const { return planes[0].width(); }
  std::size_t height() const { return planes[0].height(); }
};

}  // namespace imgstat
