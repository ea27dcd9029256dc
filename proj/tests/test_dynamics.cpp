#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rdslab/dynamics.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

TEST_CASE("expanding affine hand evaluations") {
  const MapFamily f = MapFamily::expanding_affine(3);
  CHECK(f.apply(1, 0.0) == 0.0);
  CHECK(f.apply(2, 0.4) == doctest::Approx(0.2).epsilon(1e-15));  // 3*0.4 mod 1
  CHECK(f.degree(1) == 2);
  CHECK(f.degree(3) == 4);
}

TEST_CASE("rotation hand evaluation") {
  const MapFamily f = MapFamily::rotation({0.25});
  CHECK(f.apply(1, 0.9) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(f.degree(1) == 1);
}

TEST_CASE("range is always [0,1) including the clamp") {
  const MapFamily f = MapFamily::expanding_affine(4);
  Rng rng(31);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.next_double();
    for (int j = 1; j <= 4; ++j) {
      const double y = f.apply(j, x);
      CHECK(y >= 0.0);
      CHECK(y < 1.0);
    }
  }
  // values whose image rounds to exactly 1.0
  CHECK(f.apply(2, std::nextafter(1.0 / 3.0, 0.0)) < 1.0);
}

TEST_CASE("domain errors") {
  const MapFamily f = MapFamily::expanding_affine(2);
  CHECK_THROWS_AS(f.apply(1, 1.0), DomainError);
  CHECK_THROWS_AS(f.apply(1, -0.1), DomainError);
  CHECK_THROWS_AS(f.apply(0, 0.5), DomainError);
  CHECK_THROWS_AS(f.apply(3, 0.5), DomainError);
}

TEST_CASE("apply_word: identity on empty, hand case, composition") {
  const MapFamily f = MapFamily::expanding_affine(2);
  CHECK(f.apply_word(Word({}, 2), 0.37) == 0.37);
  // T1: 0.2, then T2: 0.6
  CHECK(f.apply_word(Word::parse("12", 2), 0.1) == doctest::Approx(0.6).epsilon(1e-12));

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t lu = rng.next_u64() % 6;
    const std::uint64_t lv = rng.next_u64() % 6;
    Word u = sample_word(2, lu, rng);
    Word v = sample_word(2, lv, rng);
    const double x = rng.next_double();
    const double lhs = f.apply_word(concat(u, v), x);
    const double rhs = f.apply_word(v, f.apply_word(u, x));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("orbit matches apply_word and is re-checkable step by step") {
  const MapFamily f = MapFamily::expanding_affine(2);

  CHECK(f.orbit(WordSource::random(2, 1), 0.3, 0) == std::vector<double>{0.3});

  // doubling-map period-2 orbit of 1/3
  const auto orb = f.orbit(WordSource::periodic(Word::parse("1", 2)), 1.0 / 3.0, 4);
  REQUIRE(orb.size() == 5);
  CHECK(orb[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(orb[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(orb[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(orb[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(orb[4] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Rng rng(88);
  for (int trial = 0; trial < 100; ++trial) {
    const WordSource src = WordSource::random(2, rng.next_u64());
    const double x = rng.next_double();
    const std::uint64_t n = 1 + rng.next_u64() % 12;
    const auto states = f.orbit(src, x, n);
    REQUIRE(states.size() == n + 1);
    CHECK(states.back() == f.apply_word(src.prefix(n), x));
    // bit-exact single-step recomputation
    for (std::uint64_t k = 0; k < n; ++k)
      CHECK(states[k + 1] == f.apply(src.symbol(k + 1), states[k]));
  }
}

TEST_CASE("expanding maps preserve Lebesgue: KS distance of pushforward") {
  const MapFamily f = MapFamily::expanding_affine(2);
  for (int j = 1; j <= 2; ++j) {
    Rng rng(1000 + j);
    const int n = 1000000;
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i) ys[i] = f.apply(j, rng.next_double());
    std::sort(ys.begin(), ys.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double cdf = ys[i];
      ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
      ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    CHECK(ks < 0.005);
  }
}

TEST_CASE("piecewise affine family: user doubling map agrees with builtin") {
  MapFamily::PiecewiseMap m;
  m.breaks = {0.0, 0.5, 1.0};
  m.slopes = {2.0, 2.0};
  m.offsets = {0.0, -1.0};
  const MapFamily f = MapFamily::piecewise_affine({m});
  const MapFamily g = MapFamily::expanding_affine(1);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.next_double();
    CHECK(f.apply(1, x) == doctest::Approx(g.apply(1, x)).epsilon(1e-14));
  }
  CHECK(f.degree(1) == 2);
}

TEST_CASE("piecewise validation") {
  MapFamily::PiecewiseMap bad;
  bad.breaks = {0.0, 0.7};
  bad.slopes = {1.0};
  bad.offsets = {0.0};
  CHECK_THROWS_AS(MapFamily::piecewise_affine({bad}), ConfigError);
}
