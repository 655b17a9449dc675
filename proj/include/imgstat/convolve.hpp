#pragma once

#include <cstddef>
#include <vector>

#include "imgstat/image.hpp"

namespace imgstat {

// Square real kernel, odd or even side, stored row-major.
struct Kernel {
  std::size_t side = 0;
  std::vector<double> weights;

  double operator()(std::size_t row, std::size_t col) const { return weights[row * side + col]; }
};

// Same-size 2-D convolution with mirror (reflect-101) borders. The kernel
// side must be odd and no larger than either image dimension.
FloatImage convolve_reflect(const FloatImage& img, const Kernel& k);

// Convolution over fully supported positions only:
// (H - side + 1) x (W - side + 1) output.
FloatImage convolve_valid(const FloatImage& img, const Kernel& k);

}  // namespace imgstat
