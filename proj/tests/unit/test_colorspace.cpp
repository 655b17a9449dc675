#include <doctest.h>

#include <numeric>

#include "imgstat/colorspace.hpp"
#include "imgstat/random.hpp"

using namespace imgstat;
using doctest::Approx;

namespace {

RgbImage random_rgb(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(w, h);
  for (auto& p : img.values()) {
    p = Rgb{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
            static_cast<std::uint8_t>(rng.below(256))};
  }
  return img;
}

}  // namespace

TEST_CASE("luma weights") {
  auto one = [](Rgb p) { return to_luma(RgbImage(1, 1, p))(0, 0); };
  CHECK(one({255, 255, 255}) == Approx(255.0).epsilon(1e-12));
  CHECK(one({255, 0, 0}) == Approx(76.245).epsilon(1e-12));
  CHECK(one({0, 100, 0}) == Approx(58.7).epsilon(1e-12));
  CHECK(one({0, 0, 0}) == 0.0);
}

TEST_CASE("luma is monotone in each channel") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    Rgb p{static_cast<std::uint8_t>(rng.below(255)), static_cast<std::uint8_t>(rng.below(255)),
          static_cast<std::uint8_t>(rng.below(255))};
    const double base = to_luma(RgbImage(1, 1, p))(0, 0);
    Rgb q = p;
    switch (i % 3) {
      case 0: ++q.r; break;
      case 1: ++q.g; break;
      default: ++q.b; break;
    }
    CHECK(to_luma(RgbImage(1, 1, q))(0, 0) >= base);
  }
}

TEST_CASE("normalized luminance") {
  CHECK(normalize_luminance(GrayImage(4, 4, 77.0)) == FloatImage(4, 4, 1.0));

  GrayImage pair(2, 1);
  pair(0, 0) = 50;
  pair(0, 1) = 150;
  const FloatImage n = normalize_luminance(pair);
  CHECK(n(0, 0) == Approx(0.5));
  CHECK(n(0, 1) == Approx(1.5));

  try {
    normalize_luminance(GrayImage(3, 3, 0.0));
    FAIL("expected ZeroMeanImage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroMeanImage);
  }
}

TEST_CASE("normalized luminance has unit mean") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FloatImage n = normalize_luminance(to_luma(random_rgb(37, 23, seed)));
    auto v = n.values();
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()) == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("opponent transform") {
  auto px = [](Rgb p) {
    const TriChannelImage t = to_gaussian_color(RgbImage(1, 1, p));
    return std::array{t.planes[0](0, 0), t.planes[1](0, 0), t.planes[2](0, 0)};
  };
  auto a = px({1, 1, 1});
  CHECK(a[0] == Approx(0.96));
  CHECK(a[1] == Approx(0.69));
  CHECK(a[2] == Approx(1.11));
  auto z = px({0, 0, 0});
  CHECK(z == std::array{0.0, 0.0, 0.0});
  auto r = px({100, 0, 0});
  CHECK(r[0] == Approx(6.0));
  CHECK(r[1] == Approx(30.0));
  CHECK(r[2] == Approx(34.0));
}

TEST_CASE("opponent transform is linear") {
  Rng rng(11);
  RgbImage small(16, 16), doubled(16, 16);
  for (std::size_t i = 0; i < small.size(); ++i) {
    const auto r = static_cast<std::uint8_t>(rng.below(128));
    const auto g = static_cast<std::uint8_t>(rng.below(128));
    const auto b = static_cast<std::uint8_t>(rng.below(128));
    small.values()[i] = Rgb{r, g, b};
    doubled.values()[i] = Rgb{static_cast<std::uint8_t>(2 * r), static_cast<std::uint8_t>(2 * g),
                              static_cast<std::uint8_t>(2 * b)};
  }
  const TriChannelImage lo = to_gaussian_color(small);
  const TriChannelImage hi = to_gaussian_color(doubled);
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < small.size(); ++i)
      CHECK(hi.planes[k].values()[i] == Approx(2.0 * lo.planes[k].values()[i]).epsilon(1e-12));
}

TEST_CASE("block upsample duplicates pixels") {
  GrayImage g(2, 3);
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = static_cast<double>(i);
  const GrayImage u = block_upsample(g, 2);
  CHECK(u.width() == 4);
  CHECK(u.height() == 6);
  CHECK(u(5, 3) == g(2, 1));
  CHECK(u(4, 2) == g(2, 1));
  CHECK(u(0, 1) == g(0, 0));
}
