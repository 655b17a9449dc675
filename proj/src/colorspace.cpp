#include "imgstat/colorspace.hpp"

#include <numeric>

namespace imgstat {

GrayImage to_luma(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
  }
  return out;
}

FloatImage normalize_luminance(const GrayImage& gray) {
  auto src = gray.values();
  const double mean = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(src.size());
  if (!(mean > 0.0)) {
    throw Error(ErrorCode::ZeroMeanImage, "mean luminance is zero");
  }
  FloatImage out(gray.width(), gray.height());
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / mean;
  return out;
}

TriChannelImage to_gaussian_color(const RgbImage& img) {
  static constexpr double kM[3][3] = {
      {0.06, 0.63, 0.27},
      {0.30, 0.04, 0.35},
      {0.34, 0.60, 0.17},
  };
  TriChannelImage out;
  for (auto& p : out.planes) p = FloatImage(img.width(), img.height());
  auto src = img.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double rgb[3] = {double(src[i].r), double(src[i].g), double(src[i].b)};
    for (int k = 0; k < 3; ++k) {
      out.planes[k].values()[i] = kM[k][0] * rgb[0] + kM[k][1] * rgb[1] + kM[k][2] * rgb[2];
    }
  }
  return out;
}

}  // namespace imgstat
