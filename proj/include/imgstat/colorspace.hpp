#pragma once

#include "imgstat/image.hpp"

namespace imgstat {

// Rec.601 luma, kept real-valued.
GrayImage to_luma(const RgbImage& img);

// Y / mean(Y). Throws ZeroMeanImage when the mean is not positive.
FloatImage normalize_luminance(const GrayImage& gray);

// Opponent-colour transform tuned to human colour perception. Inputs are
// taken on the stored [0,255] scale without linearization.
TriChannelImage to_gaussian_color(const RgbImage& img);

// Pixel duplication into factor x factor blocks.
template <typename T>
Raster<T> block_upsample(const Raster<T>& img, std::size_t factor) {
  Raster<T> out(img.width() * factor, img.height() * factor);
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t c = 0; c < out.width(); ++c) out(r, c) = img(r / factor, c / factor);
  }
  return out;
}

}  // namespace imgstat
