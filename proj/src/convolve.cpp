#include "imgstat/convolve.hpp"

namespace imgstat {

namespace {

// reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

}  // namespace

FloatImage convolve_reflect(const FloatImage& img, const Kernel& k) {
  if (k.side % 2 == 0) throw Error(ErrorCode::BadConfig, "reflective convolution needs an odd kernel");
  if (img.width() < k.side || img.height() < k.side) {
    throw Error(ErrorCode::ImageSmallerThanKernel, "image smaller than kernel");
  }
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto r = static_cast<std::ptrdiff_t>(k.side / 2);

  // Pad once so the inner loop is branch-free.
  const std::size_t pw = static_cast<std::size_t>(w + 2 * r);
  const std::size_t ph = static_cast<std::size_t>(h + 2 * r);
  std::vector<double> padded(pw * ph);
  for (std::size_t y = 0; y < ph; ++y) {
    const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(y) - r, h);
    for (std::size_t x = 0; x < pw; ++x) {
      padded[y * pw + x] = img(sy, reflect(static_cast<std::ptrdiff_t>(x) - r, w));
    }
  }

  FloatImage out(img.width(), img.height());
  const std::size_t side = k.side;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      // out(y,x) = sum_{a,b} k(a,b) * in(y + r - a, x + r - b)
      for (std::size_t a = 0; a < side; ++a) {
        const double* src = &padded[(y + side - 1 - a) * pw + x + side - 1];
        const double* kr = &k.weights[a * side];
        for (std::size_t b = 0; b < side; ++b) acc += kr[b] * src[-static_cast<std::ptrdiff_t>(b)];
      }
      out(y, x) = acc;
    }
  }
  return out;
}

FloatImage convolve_valid(const FloatImage& img, const Kernel& k) {
  if (k.side == 0 || img.width() < k.side || img.height() < k.side) {
    throw Error(ErrorCode::ImageSmallerThanKernel, "image smaller than filter");
  }
  const std::size_t side = k.side;
  const std::size_t ow = img.width() - side + 1;
  const std::size_t oh = img.height() - side + 1;
  const std::size_t w = img.width();
  auto src = img.values();
  FloatImage out(ow, oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t a = 0; a < side; ++a) {
        const double* row = &src[(y + side - 1 - a) * w + x + side - 1];
        const double* kr = &k.weights[a * side];
        for (std::size_t b = 0; b < side; ++b) acc += kr[b] * row[-static_cast<std::ptrdiff_t>(b)];
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace imgstat
