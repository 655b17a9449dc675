#include <doctest.h>

#include <cmath>
#include <numeric>

#include "imgstat/error.hpp"
#include "imgstat/random.hpp"
#include "imgstat/random_filters.hpp"

using namespace imgstat;
using doctest::Approx;

namespace {

GrayImage noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage g(n, n);
  for (auto& v : g.values()) v = 128.0 + 30.0 * rng.normal();
  return g;
}

}  // namespace

TEST_CASE("filter invariants") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (std::size_t side : {2u, 3u, 8u, 11u}) {
      const RandomFilter f = make_random_filter(side, seed);
      const auto& w = f.kernel.weights;
      CHECK(w.size() == side * side);
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0)) < 1e-9);
      CHECK(std::abs(std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0)) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("filters are deterministic per seed") {
  CHECK(make_random_filter(8, 123) == make_random_filter(8, 123));
  CHECK_FALSE(make_random_filter(8, 123) == make_random_filter(8, 124));
  const auto battery = make_filter_battery(3, 8, 500);
  REQUIRE(battery.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(battery[i] == make_random_filter(8, 500 + i));
}

TEST_CASE("bad side") {
  for (std::size_t side : {0u, 1u}) {
    try {
      make_random_filter(side, 1);
      FAIL("expected BadSide");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadSide);
    }
  }
}

TEST_CASE("valid responses have the right count and ignore offsets") {
  const GrayImage g = noise(40, 2);
  GrayImage shifted = g;
  for (auto& v : shifted.values()) v += 1000.0;
  const RandomFilter f = make_random_filter(8, 9);
  const auto a = filter_responses(g, f);
  const auto b = filter_responses(shifted, f);
  CHECK(a.size() == 33u * 33u);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Approx(a[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("negated image mirrors the histogram") {
  const GrayImage g = noise(48, 5);
  GrayImage neg = g;
  for (auto& v : neg.values()) v = -v;
  const RandomFilter f = make_random_filter(8, 1);
  const auto edges = symmetric_edges(200.0, 64);
  const auto a = filter_response_kurtosis(g, f, edges);
  const auto b = filter_response_kurtosis(neg, f, edges);
  REQUIRE(a.kurtosis);
  CHECK(*b.kurtosis == Approx(*a.kurtosis).epsilon(1e-12));
  const std::size_t bins = a.histogram.bins();
  for (std::size_t i = 0; i < bins; ++i) CHECK(a.histogram.counts[i] == b.histogram.counts[bins - 1 - i]);
}

TEST_CASE("symmetric edges") {
  const auto e = symmetric_edges(2.0, 4);
  CHECK(e == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
}

TEST_CASE("constant image is degenerate") {
  const auto r = filter_response_kurtosis(GrayImage(16, 16, 42.0), make_random_filter(8, 0), symmetric_edges(1.0, 8));
  CHECK_FALSE(r.kurtosis.has_value());
}

TEST_CASE("gaussian noise gives gaussian kurtosis") {
  const auto battery = make_filter_battery(3, 8, kDefaultFilterSeed);
  const auto edges = symmetric_edges(300.0, 256);
  for (const auto& f : battery) {
    double acc = 0;
    for (std::uint64_t i = 0; i < 100; ++i) acc += *filter_response_kurtosis(noise(128, 1000 + i), f, edges).kurtosis;
    CHECK(std::abs(acc / 100.0 - 3.0) < 0.1);
  }
}

TEST_CASE("kurtosis is reproducible across runs") {
  const GrayImage g = noise(64, 3);
  const auto edges = symmetric_edges(300.0, 256);
  for (const auto& f : make_filter_battery(3, 8, 77)) {
    const auto again = make_random_filter(8, f.seed);
    CHECK(*filter_response_kurtosis(g, f, edges).kurtosis == *filter_response_kurtosis(g, again, edges).kurtosis);
  }
}

TEST_CASE("filter json round trip and validation") {
  const RandomFilter f = make_random_filter(8, 31);
  nlohmann::json j = f;
  CHECK(j.at("seed") == 31);
  CHECK(j.at("side") == 8);
  CHECK(nlohmann::json::parse(j.dump()).get<RandomFilter>() == f);

  j["weights"][0] = j["weights"][0].get<double>() + 0.1;
  try {
    (void)j.get<RandomFilter>();
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }
}

TEST_CASE("image smaller than filter") {
  try {
    filter_responses(GrayImage(5, 5, 1.0), make_random_filter(8, 0));
    FAIL("expected ImageSmallerThanKernel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImageSmallerThanKernel);
  }
}
