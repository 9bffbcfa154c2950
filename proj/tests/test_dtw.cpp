#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "loadwin/dtw.hpp"
#include "support/oracles.hpp"

using loadwin::AlignmentPath;
using loadwin::DtwConfig;
using loadwin::dtw_distance;
using loadwin::dtw_path;

namespace {

// Monotone-continuous path from (0,0) to (n-1,m-1) whose accumulated cost
// matches the reported distance.
void check_path_valid(const AlignmentPath& path, std::span<const double> x,
                      std::span<const double> y, double distance) {
  REQUIRE(path.front() == std::make_pair<std::size_t, std::size_t>(0, 0));
  REQUIRE(path.back() == std::make_pair(x.size() - 1, y.size() - 1));
  double cost = 0.0;
  for (std::size_t s = 0; s < path.size(); ++s) {
    const auto [i, j] = path[s];
    cost += (x[i] - y[j]) * (x[i] - y[j]);
    if (s > 0) {
      const auto di = i - path[s - 1].first;
      const auto dj = j - path[s - 1].second;
      REQUIRE(di <= 1);
      REQUIRE(dj <= 1);
      REQUIRE(di + dj >= 1);
    }
  }
  REQUIRE(std::sqrt(cost) == Catch::Approx(distance).margin(1e-9));
}

std::vector<double> random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mw(10000.0, 80000.0);
  std::vector<double> p(24);
  for (auto& v : p) v = mw(rng);
  return p;
}

}  // namespace

TEST_CASE("identical sequences are at distance zero exactly") {
  const std::vector<double> x{41000.0, 39500.25, 47210.5, 52000.0};
  REQUIRE(dtw_distance(x, x) == 0.0);
  REQUIRE(dtw_distance(x, x, DtwConfig{0}) == 0.0);
}

TEST_CASE("known distances") {
  const std::vector<double> a{0, 0, 1}, b{0, 1};
  REQUIRE(dtw_distance(a, b) == Catch::Approx(0.0).margin(1e-12));

  const std::vector<double> x{1, 2, 3}, y{2, 2, 4};
  // band 0 forces the diagonal: (1-2)^2 + (2-2)^2 + (3-4)^2 = 2
  REQUIRE(dtw_distance(x, y, DtwConfig{0}) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  REQUIRE(dtw_distance(x, y) == Catch::Approx(oracles::dtw_brute_force(x, y)).margin(1e-12));
}

TEST_CASE("path recovery matches the brute-force optimum") {
  SECTION("single-point sequences") {
    const std::vector<double> v{5};
    const auto [path, dist] = dtw_path(v, v);
    REQUIRE(path == AlignmentPath{{0, 0}});
    REQUIRE(dist == 0.0);
  }
  SECTION("shorter second sequence") {
    const std::vector<double> x{0, 0, 1}, y{0, 1};
    const auto [path, dist] = dtw_path(x, y);
    REQUIRE(path == AlignmentPath{{0, 0}, {1, 0}, {2, 1}});
    REQUIRE(dist == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("longer second sequence") {
    const std::vector<double> x{1, 2}, y{1, 2, 2};
    const auto [path, dist] = dtw_path(x, y);
    REQUIRE(path == AlignmentPath{{0, 0}, {1, 1}, {1, 2}});
    REQUIRE(dist == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("input validation") {
  const std::vector<double> x{1, 2, 3}, y{1, 2}, empty;
  REQUIRE_THROWS_AS(dtw_distance(empty, x), loadwin::EmptySequence);
  REQUIRE_THROWS_AS(dtw_distance(x, empty), loadwin::EmptySequence);
  REQUIRE_THROWS_AS(dtw_distance(x, y, DtwConfig{0}), loadwin::BandTooNarrow);
  REQUIRE_THROWS_AS(dtw_path(x, y, DtwConfig{0}), loadwin::BandTooNarrow);
  REQUIRE_THROWS_AS(dtw_distance(x, y, DtwConfig{-1}), std::invalid_argument);
  const std::vector<double> bad{1.0, std::nan("")};
  REQUIRE_THROWS_AS(dtw_distance(x, bad), std::invalid_argument);
}

TEST_CASE("exhaustive oracle equivalence on short sequences") {
  // All pairs of sequences with lengths 1..3 over {0, 1, 2, 5}: 84^2 pairs.
  const std::array<double, 4> alphabet{0, 1, 2, 5};
  std::vector<std::vector<double>> sequences;
  for (std::size_t len = 1; len <= 3; ++len) {
    std::vector<std::size_t> digits(len, 0);
    while (true) {
      std::vector<double> seq(len);
      for (std::size_t i = 0; i < len; ++i) seq[i] = alphabet[digits[i]];
      sequences.push_back(seq);
      std::size_t pos = 0;
      while (pos < len && ++digits[pos] == alphabet.size()) digits[pos++] = 0;
      if (pos == len) break;
    }
  }
  REQUIRE(sequences.size() == 84);
  for (const auto& x : sequences) {
    for (const auto& y : sequences) {
      const double expect = oracles::dtw_brute_force(x, y);
      REQUIRE(dtw_distance(x, y) == Catch::Approx(expect).margin(1e-9));
    }
  }
}

TEST_CASE("banded distances agree with the banded oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::uniform_int_distribution<std::size_t> len(2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(len(rng)), y(len(rng));
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const int min_band = static_cast<int>(x.size() > y.size() ? x.size() - y.size()
                                                              : y.size() - x.size());
    for (int band = min_band; band <= min_band + 2; ++band) {
      const double expect = oracles::dtw_brute_force(x, y, band);
      REQUIRE(dtw_distance(x, y, DtwConfig{band}) == Catch::Approx(expect).margin(1e-9));
    }
  }
}

TEST_CASE("algebraic properties on random 24-hour profiles") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = random_profile(rng);
    const auto y = random_profile(rng);

    const double d_xy = dtw_distance(x, y);
    REQUIRE(d_xy >= 0.0);
    REQUIRE(dtw_distance(y, x) == Catch::Approx(d_xy).margin(1e-12));

    // band 0 on equal lengths reduces to the pointwise L2 distance
    double l2 = 0.0;
    for (std::size_t h = 0; h < x.size(); ++h) l2 += (x[h] - y[h]) * (x[h] - y[h]);
    REQUIRE(dtw_distance(x, y, DtwConfig{0}) == Catch::Approx(std::sqrt(l2)).margin(1e-12));

    const auto [path, dist] = dtw_path(x, y);
    REQUIRE(dist == Catch::Approx(d_xy).margin(1e-12));
    check_path_valid(path, x, y, dist);
  }
}
