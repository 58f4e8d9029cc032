#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "fracdecay/erdos.hpp"
#include "fracdecay/rng.hpp"
#include "oracles.hpp"

using namespace fracdecay;
using Catch::Matchers::WithinAbs;

namespace {

// h(1/4) = -(1/4) log(1/4) - (3/4) log(3/4), evaluated in mpmath.
constexpr double kEntropyQuarter = 0.5623351446188084;

CoverConfig cfg(double theta, double eps, int n, double c0 = 1.0, Interval range = {1.0, 2.0}) {
  return {c0, theta, eps, n, range};
}

}  // namespace

TEST_CASE("omega") {
  CHECK_THAT(omega(0.5, 3.0), WithinAbs(std::log(10.0), 1e-15));
  CHECK_THAT(omega(0.25, 2.0), WithinAbs(kEntropyQuarter + 0.5 * std::log(4.0), 1e-15));
  CHECK_THAT(binary_entropy(0.25), WithinAbs(kEntropyQuarter, 1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  double prev = omega(0.1, 3.0);
  for (int k = 2; k <= 6; ++k) {
    const double v = omega(std::pow(10.0, -k), 3.0);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK(prev < 1e-4);
  for (double bad : {0.0, 1.0, -0.1, 1.5}) {
    try {
      omega(bad, 3.0);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
}

TEST_CASE("child window and forced child") {
  const auto [lo, hi] = child_window(3.0, 5);
  CHECK(lo == 13);
  CHECK(hi == 17);
  CHECK(forced_child(3.0, 5) == 15);
  for (double theta : {2.0, 2.5, 3.0, 3.7, 10.0 / 3.0}) {
    for (std::int64_t r = -20; r <= 40; ++r) {
      const auto [a, b] = child_window(theta, r);
      CHECK(b - a + 1 <= static_cast<std::int64_t>(std::floor(theta)) + 2);
    }
  }
}

TEST_CASE("brute membership") {
  // c0 = 1, theta = 2, integer x: every orbit point is an integer
  const Membership a = brute_membership(3.0, cfg(2.0, 0.2, 10, 1.0, {1.0, 4.0}));
  CHECK(a.good_count == 10);
  CHECK(a.is_member);
  // theta = 3, x = 1/2: ||3^k / 2|| = 1/2
  const Membership b = brute_membership(0.5, cfg(3.0, 0.45, 8, 1.0, {0.0, 1.0}));
  CHECK(b.good_count == 0);
  CHECK_FALSE(b.is_member);
}

TEST_CASE("orbit digits agree with a long-double oracle") {
  const CounterRng rng(5);
  const CoverConfig c = cfg(3.0, 0.3, 10);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const double x = 1.0 + rng.uniform(0, i);
    const Orbit o = orbit_digits(x, c);
    long double y = x;
    int good = 0;
    for (int k = 1; k <= c.N; ++k) {
      y *= 3;
      if (oracle::dist_int(y) < c.threshold()) ++good;
    }
    CHECK(good == o.good_count);
  }
}

TEST_CASE("bad budget") {
  CHECK(cfg(3.0, 0.3, 10).bad_budget() == 2);  // s < 3
  CHECK(cfg(3.0, 0.25, 8).bad_budget() == 1);  // s < 2
  CHECK(cfg(3.0, 0.05, 10).bad_budget() == 0);  // s < 1
  CHECK(cfg(2.0, 0.45, 10).bad_budget() == 4);  // s < 4.5
}

TEST_CASE("zero bad budget collapses the tree to forced chains") {
  for (double theta : {2.0, 3.0}) {
    for (int n : {4, 6, 9}) {
      const CoverConfig c = cfg(theta, 0.5 / n, n);
      REQUIRE(c.bad_budget() == 0);
      const CoverResult r = build_cover(c);
      CHECK(static_cast<double>(r.count) <= c.c0 * theta * c.range.width() + 1.0);
      CHECK(r.max_children <= 1);
      CHECK(verify_cover(c, static_cast<std::size_t>(20 * c.scale()), r, false).violations.empty());
    }
  }
}

TEST_CASE("cover covers and respects its bound") {
  for (double theta : {2.0, 3.0}) {
    for (double eps : {0.2, 0.3, 0.45}) {
      for (int n : {4, 6}) {
        const CoverConfig c = cfg(theta, eps, n);
        const CoverResult r = build_cover(c);
        CHECK(static_cast<double>(r.count) <= r.bound);
        CHECK(r.count == r.intervals.size());
        const double w = 1.0 / c.scale();
        for (const auto& iv : r.intervals) {
          CHECK(iv.left >= c.range.lo - w);
          CHECK(iv.right <= c.range.hi + w);
          CHECK(iv.right - iv.left <= w * (1 + 1e-12));
        }
        for (std::size_t i = 1; i < r.intervals.size(); ++i) CHECK(r.intervals[i].left >= r.intervals[i - 1].left);
        const CoverReport rep = verify_cover(c, static_cast<std::size_t>(std::ceil(10 * c.scale())) + 1, r);
        CHECK(rep.violations.empty());
        CHECK(rep.max_children <= static_cast<std::size_t>(theta) + 2);
      }
    }
  }
}

TEST_CASE("spec oracle runs") {
  const CoverReport a = verify_cover(cfg(3.0, 0.3, 8), 100'000);
  CHECK(a.violations.empty());
  CHECK(a.members > 0);
  const CoverReport b = verify_cover(cfg(2.0, 0.45, 10), 20'000);
  CHECK(b.violations.empty());
  CHECK(b.within_bound());
}

TEST_CASE("N = 1 exhaustively") {
  for (double theta : {2.0, 3.0, 2.5}) {
    const CoverConfig c = cfg(theta, 0.3, 1);  // no bad index allowed
    const CoverResult r = build_cover(c);
    // every x with ||c0 theta x|| < tau must be covered
    const std::size_t n = 200'000;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = 1.0 + static_cast<double>(i) / static_cast<double>(n - 1);
      if (oracle::dist_int(static_cast<long double>(theta) * x) >= c.threshold()) continue;
      bool hit = false;
      for (const auto& iv : r.intervals) hit = hit || (iv.left - 1e-12 <= x && x <= iv.right + 1e-12);
      CHECK(hit);
    }
  }
}

TEST_CASE("forced chains reproduce all-good orbits") {
  std::mt19937_64 gen(17);
  for (double theta : {2.0, 3.0}) {
    const CoverConfig c = cfg(theta, 0.3, 12);
    int tested = 0;
    oracle::GoodOrbit g;
    while (tested < 300) {
      if (!oracle::good_orbit(c.c0, theta, c.N, 1.0, 2.0, gen, g)) continue;
      ++tested;
      const Orbit o = orbit_digits(g.x, c);
      REQUIRE(o.good_count == c.N);
      CHECK(o.r == g.r);
      for (int k = 1; k < c.N; ++k) {
        CHECK(forced_child(theta, o.r[static_cast<std::size_t>(k - 1)]) == o.r[static_cast<std::size_t>(k)]);
      }
    }
  }
}

TEST_CASE("count / exp(omega N) stays bounded") {
  for (double theta : {2.0, 3.0}) {
    double worst = 0.0;
    for (int n = 4; n <= 14; ++n) {
      const CoverResult r = build_cover(cfg(theta, 0.3, n));
      worst = std::max(worst, static_cast<double>(r.count) / r.omega_bound);
    }
    CHECK(worst < 10.0);
  }
}

TEST_CASE("node budget and grid precondition") {
  try {
    build_cover(cfg(3.0, 0.45, 12), 1000);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
  CHECK_THROWS_AS(verify_cover(cfg(3.0, 0.3, 8), 100), Error);
  CHECK_THROWS_AS(cfg(0.5, 0.3, 8).validate(), Error);
  CHECK_THROWS_AS(cfg(3.0, 0.6, 8).validate(), Error);
}

TEST_CASE("an incomplete cover is caught by the oracle") {
  const CoverConfig c = cfg(3.0, 0.3, 6);
  CoverResult r = build_cover(c);
  const auto grid = static_cast<std::size_t>(20 * c.scale());
  // drop an interval that is the only one covering some member
  std::ptrdiff_t victim = -1;
  for (std::size_t i = 0; i < grid && victim < 0; ++i) {
    const double x = c.range.lo + c.range.width() * static_cast<double>(i) / static_cast<double>(grid - 1);
    if (!brute_membership(x, c).is_member) continue;
    std::vector<std::ptrdiff_t> hits;
    for (std::size_t k = 0; k < r.intervals.size(); ++k) {
      if (r.intervals[k].left <= x && x <= r.intervals[k].right) hits.push_back(static_cast<std::ptrdiff_t>(k));
    }
    if (hits.size() == 1) victim = hits[0];
  }
  REQUIRE(victim >= 0);
  r.intervals.erase(r.intervals.begin() + victim);
  try {
    verify_cover(c, grid, r);
    FAIL("expected OracleViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OracleViolation);
  }
  CHECK_FALSE(verify_cover(c, grid, r, false).violations.empty());
}
