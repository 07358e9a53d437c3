#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "histmle/error.hpp"
#include "histmle/thresholding.hpp"
#include "oracles.hpp"

using namespace histmle;

TEST_CASE("midrange threshold") {
  CHECK(midrange_threshold(IntensityField(3, 1, {0.2, 0.5, 0.8})) == 0.5);
  CHECK(midrange_threshold(IntensityField(2, 2, {0.37, 0.37, 0.37, 0.37})) == 0.37);
  CHECK(midrange_threshold(normalize(GrayImage(2, 1, {0, 255}))) == 0.5);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> values(1 + trial % 30);
    for (auto& v : values) v = unit(rng);
    const double t = midrange_threshold(IntensityField(values.size(), 1, values));
    CHECK(t >= *std::min_element(values.begin(), values.end()));
    CHECK(t <= *std::max_element(values.begin(), values.end()));
  }
}

TEST_CASE("otsu splits two equal spikes at the lowest maximizing cut") {
  std::vector<std::uint64_t> counts(256, 0);
  counts[64] = 500;
  counts[192] = 500;
  const Histogram h(BinGrid::unit(256), counts);
  const double t = otsu_threshold(h);
  CHECK(t == h.grid().left_edge(65));
  CHECK(oracle::otsu_cut(counts) == 65);
}

TEST_CASE("otsu rejects single-spike histograms") {
  std::vector<std::uint64_t> counts(16, 0);
  counts[3] = 10;
  try {
    otsu_threshold(Histogram(BinGrid::unit(16), counts));
    FAIL("expected DegenerateHistogram");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateHistogram);
  }
}

TEST_CASE("otsu equals brute force on random histograms") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> count(0, 1000);
  std::bernoulli_distribution sparse(0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> counts(256);
    for (auto& c : counts) c = sparse(rng) ? 0 : static_cast<std::uint64_t>(count(rng));
    const Histogram h(BinGrid::unit(256), counts);
    CHECK(otsu_threshold(h) == h.grid().left_edge(oracle::otsu_cut(counts)));
  }
}

TEST_CASE("modal midpoints") {
  const auto two = modal_midpoints(MixtureModel({{0.5, 0.3, 0.05}, {0.5, 0.7, 0.05}}));
  REQUIRE(two.values().size() == 1);
  CHECK(two.values()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.method() == ThresholdMethod::ModalMidpoint);

  const auto three = modal_midpoints(MixtureModel({{0.3, 0.1, 0.05}, {0.4, 0.5, 0.05}, {0.3, 0.9, 0.05}}));
  REQUIRE(three.values().size() == 2);
  CHECK(three.values()[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(three.values()[1] == doctest::Approx(0.7).epsilon(1e-15));

  CHECK_THROWS_AS(modal_midpoints(MixtureModel({{1.0, 0.5, 0.1}})), Error);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto set = modal_midpoints(MixtureModel(oracle::random_modes(rng, 2 + trial % 5)));
    for (std::size_t k = 1; k < set.values().size(); ++k) CHECK(set.values()[k - 1] < set.values()[k]);
  }
}

TEST_CASE("binarize uses value >= t") {
  const IntensityField constant(2, 2, {0.4, 0.4, 0.4, 0.4});
  const BinaryMap all_white = binarize(constant, 0.4);
  CHECK(std::all_of(all_white.bits().begin(), all_white.bits().end(), [](auto b) { return b == 1; }));

  const IntensityField mixed(3, 1, {0.0, 0.7, 1.0});
  const BinaryMap zero = binarize(mixed, 0.0);
  CHECK(std::all_of(zero.bits().begin(), zero.bits().end(), [](auto b) { return b == 1; }));
  const BinaryMap top = binarize(mixed, 1.0);
  CHECK(top == BinaryMap(3, 1, {0, 0, 1}));
  CHECK_THROWS_AS(binarize(mixed, 1.01), Error);

  const IntensityField checker(2, 2, {0.0, 1.0, 1.0, 0.0});
  const BinaryMap map = binarize(checker, 0.5);
  CHECK(map == BinaryMap(2, 2, {0, 1, 1, 0}));
  CHECK(map.to_image() == GrayImage(2, 2, {0, 255, 255, 0}));
}

TEST_CASE("binarize is monotone in the threshold") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(400);
  for (auto& v : values) v = unit(rng);
  const IntensityField field(20, 20, values);
  for (int trial = 0; trial < 50; ++trial) {
    double lo = unit(rng), hi = unit(rng);
    if (lo > hi) std::swap(lo, hi);
    const BinaryMap a = binarize(field, lo);
    const BinaryMap b = binarize(field, hi);
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(b.bits()[i] <= a.bits()[i]);
  }
}
