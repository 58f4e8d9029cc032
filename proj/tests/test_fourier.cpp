#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "fracdecay/fourier.hpp"
#include "fracdecay/rng.hpp"
#include "oracles.hpp"

using namespace fracdecay;
using Catch::Matchers::WithinAbs;

namespace {

// |mu_hat(1)| for the Cantor measure, from a 60-digit mpmath evaluation of
// the infinite product.
constexpr double kCantorMuHatOne = 0.37143735670876563;

}  // namespace

TEST_CASE("characteristic polynomial") {
  const DerivedIfs d = validate(oracle::cantor());
  CHECK(char_poly(d, 0.0) == Complex(1.0, 0.0));
  for (int k = -5; k <= 5; ++k) {
    const Complex z = char_poly(d, 3.0 * k);
    CHECK_THAT(z.real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(z.imag(), WithinAbs(0.0, 1e-15));
  }
  CHECK(std::abs(char_poly(d, 0.75)) < 1e-16);
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs e = validate(spec);
    for (double t : {0.1, 1.7, -33.3, 1e6}) CHECK(std::abs(char_poly(e, t)) <= 1.0 + 1e-15);
  }
}

TEST_CASE("mu_hat against the long-double product oracle") {
  const CounterRng rng(11);
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs d = validate(spec);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const double xi = -1e5 + 2e5 * rng.uniform(0, i);
      // truncation 1e-12 plus long-double rounding in the oracle's phases
      CHECK(std::abs(mu_hat(d, xi, 1e-12) - oracle::mu_hat(spec, xi)) < 2e-12 + 1e-18 * std::abs(xi));
    }
  }
}

TEST_CASE("mu_hat basics") {
  const DerivedIfs d = validate(oracle::cantor());
  CHECK(mu_hat(d, 0.0, 1e-9) == Complex(1.0, 0.0));
  CHECK_THAT(std::abs(mu_hat(d, 1.0, 1e-13)), WithinAbs(kCantorMuHatOne, 1e-12));
  double p = 1.0;
  for (int n = 1; n <= 20; ++n) {
    p *= 3.0;
    CHECK(std::abs(mu_hat(d, p, 1e-9) - mu_hat(d, 1.0, 1e-9)) < 2e-9);
  }
  for (double xi : {0.3, 17.0, -250.5, 9e4}) {
    CHECK(std::abs(mu_hat(d, -xi, 1e-9) - std::conj(mu_hat(d, xi, 1e-9))) < 2e-9);
  }
  CHECK_THROWS_AS(mu_hat(d, 1.0, 0.0), Error);
  CHECK_THROWS_AS(mu_hat(d, 1.0, 1.0), Error);
}

TEST_CASE("discrete transforms") {
  DiscreteMeasure single;
  single.atoms = {{0.5, 1.0}};
  CHECK(std::abs(mu_hat_discrete(single, 1.0) - Complex(-1.0, 0.0)) < 1e-15);
  CHECK(mu_hat_discrete(single, 0.0) == Complex(1.0, 0.0));

  const DerivedIfs d = validate(oracle::cantor());
  for (int n = 0; n <= 10; ++n) {
    Complex prod{1.0, 0.0};
    double t = 1.0;
    for (int k = 0; k <= n; ++k) {
      prod *= char_poly(d, t);
      t *= d.rho();
    }
    CHECK(std::abs(mu_hat_discrete(level_atoms(d, n), 1.0) - prod) < 1e-12);
  }
}

TEST_CASE("tail transform and factorization") {
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs d = validate(spec);
    const TailSpec whole = tail_spec(d, 0);
    CHECK(tail_hat(whole, 0.0, 1e-9) == Complex(1.0, 0.0));
    for (double xi : {1.0, 10.0, 100.0, 1000.0}) {
      CHECK(std::abs(tail_hat(whole, xi, 1e-10) - mu_hat(d, xi, 1e-10)) < 2e-10);
    }
    for (int n = 0; n <= 6; ++n) {
      const auto [mu, tail] = split(d, n);
      for (double xi : {1.0, 10.0, 100.0, 1000.0}) {
        CHECK(std::abs(mu_hat_discrete(mu, xi) * tail_hat(tail, xi, 1e-9) - mu_hat(d, xi, 1e-9)) < 2e-9);
      }
    }
  }
  const DerivedIfs c = validate(oracle::cantor());
  const auto [mu5, tail5] = split(c, 5);
  for (double xi : {1.0, 10.0, 100.0}) {
    CHECK(std::abs(mu_hat_discrete(mu5, xi) * tail_hat(tail5, xi, 1e-11) - mu_hat(c, xi, 1e-11)) < 1e-10);
  }
}

TEST_CASE("oscillatory: identity phase reduces to mu_hat") {
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs d = validate(spec);
    const OscillatoryIntegrator osc(d, PhaseSpec::identity(), WeightSpec::constant(), {kDefaultAtomBudget, 1, true});
    for (double xi : {1.0, 10.0, 100.0}) {
      const double tol = 1e-5;
      CHECK(std::abs(osc(xi, tol).value - mu_hat(d, xi, tol)) < 2 * tol);
    }
  }
}

TEST_CASE("oscillatory: total mass and symmetry") {
  const DerivedIfs d = validate(oracle::cantor());
  const OscillatoryIntegrator osc(d, PhaseSpec::quadratic(1.0), WeightSpec::constant());
  CHECK(std::abs(osc(0.0, 1e-6).value - Complex(1.0, 0.0)) < 1e-12);
  for (double xi : {2.0, 20.0, 200.0}) {
    CHECK(std::abs(osc(-xi, 1e-5).value - std::conj(osc(xi, 1e-5).value)) < 1e-12);
  }
}

TEST_CASE("oscillatory: t^2 at xi = 1000 against a level N + 4 evaluation") {
  const DerivedIfs d = validate(oracle::cantor());
  const OscillatoryIntegrator osc(d, PhaseSpec::quadratic(1.0), WeightSpec::constant());
  const OscillatoryResult r = osc(1000.0, 1e-6);
  CHECK(r.error_bound <= 1e-6);
  CHECK(osc.error_bound(1000.0, r.level - 1) > 1e-6);
  const Complex deep = osc.at_level(1000.0, r.level + 4);
  CHECK(std::abs(r.value - deep) < 2e-6);
}

TEST_CASE("oscillatory: level doubling stays within tol") {
  const DerivedIfs d = validate(oracle::test_ifs()[1]);
  const OscillatoryIntegrator osc(d, PhaseSpec::exponential(1.0), WeightSpec::polynomial({1.0, 0.5}));
  for (double xi : {5.0, 50.0}) {
    const OscillatoryResult r = osc(xi, 1e-3);
    REQUIRE(2 * r.level <= 24);
    CHECK(std::abs(osc.at_level(xi, 2 * r.level) - r.value) < 1e-3);
  }
}

TEST_CASE("oscillatory: budget error reports the achievable tolerance") {
  const DerivedIfs d = validate(oracle::cantor());
  const OscillatoryIntegrator osc(d, PhaseSpec::quadratic(1.0), WeightSpec::constant(), {1000, 1, false});
  try {
    (void)osc(1e5, 1e-9);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetError& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
    CHECK(e.achievable_tol() > 1e-9);
    CHECK(e.achievable_tol() == osc.error_bound(1e5, 8));  // 2^9 atoms <= 1000 < 2^10
  }
}

TEST_CASE("oscillatory: thread count does not change a single bit") {
  const DerivedIfs d = validate(oracle::test_ifs()[3]);
  OscillatoryIntegrator osc(d, PhaseSpec::quadratic(1.0), WeightSpec::constant());
  const Complex one = osc.at_level(321.0, 7);
  osc.set_threads(3);
  const Complex three = osc.at_level(321.0, 7);
  CHECK(one.real() == three.real());
  CHECK(one.imag() == three.imag());
}

TEST_CASE("logarithmic grid") {
  const auto g = log_grid(1e2, 1e5, 64);
  CHECK(g.size() == 193);
  CHECK(g.front() == 1e2);
  CHECK(g.back() == 1e5);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  const auto h = log_grid(1.0, 50.0, 16);
  const auto expected = static_cast<std::size_t>(std::ceil(std::log10(50.0) * 16));
  CHECK(h.size() + 1 >= expected);
  CHECK(h.size() <= expected + 1);
}

namespace {

DecayProfile synthetic(int first, int last, double (*f)(double)) {
  DecayProfile p;
  p.xi_min = std::ldexp(1.0, first);
  p.xi_max = std::ldexp(1.0, last);
  for (int j = first; j < last; ++j) {
    for (double off : {0.1, 0.5, 0.9}) {
      const double xi = std::ldexp(std::pow(2.0, off), j);
      p.grid.push_back(xi);
      // the sup of every window sits at its log-centre
      p.magnitudes.push_back(off == 0.5 ? f(xi) : 0.5 * f(xi));
    }
  }
  assign_windows(p);
  return p;
}

}  // namespace

TEST_CASE("exponent fit on synthetic envelopes") {
  const ExponentFit a = fit_exponent(synthetic(3, 12, [](double x) { return std::pow(x, -0.5); }));
  CHECK_THAT(a.gamma_hat, WithinAbs(0.5, 1e-9));
  CHECK(a.residual < 1e-9);
  CHECK(a.windows == 9);
  const ExponentFit b = fit_exponent(synthetic(3, 12, [](double) { return 0.25; }));
  CHECK_THAT(b.gamma_hat, WithinAbs(0.0, 1e-9));
  try {
    fit_exponent(synthetic(3, 6, [](double) { return 1.0; }));
    FAIL("expected InsufficientWindows");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientWindows);
  }
}

TEST_CASE("decay profile: Pisot control does not decay, t^2 does") {
  const DerivedIfs d = validate(oracle::cantor());
  const OscillatoryIntegrator lin(d, PhaseSpec::identity(), WeightSpec::constant(), {kDefaultAtomBudget, 1, true});
  // the log grid plus every power of 3 in range
  DecayProfile flat;
  flat.xi_min = 16.0;
  flat.xi_max = 65536.0;
  flat.grid = log_grid(flat.xi_min, flat.xi_max, 16);
  for (double p = 27.0; p < flat.xi_max; p *= 3.0) flat.grid.push_back(p);
  std::sort(flat.grid.begin(), flat.grid.end());
  for (double xi : flat.grid) flat.magnitudes.push_back(std::abs(lin(xi, 1e-6).value));
  assign_windows(flat);
  std::size_t holding = 0;
  for (const auto& w : flat.windows) {
    bool has_power = false;
    for (double p = 27.0; p < flat.xi_max; p *= 3.0) has_power = has_power || (w.lo <= p && p < w.hi);
    if (!w.complete || !has_power) continue;
    ++holding;
    CHECK(w.sup >= kCantorMuHatOne - 2e-6);
  }
  CHECK(holding == 8);
  const ExponentFit fit = fit_exponent(flat);
  INFO("gamma_hat " << fit.gamma_hat);
  CHECK(fit.gamma_hat < 0.1);

  const OscillatoryIntegrator quad(d, PhaseSpec::quadratic(1.0), WeightSpec::constant());
  const DecayProfile prof = decay_profile(quad, 1e2, 1e4, 16, 1e-4, 2);
  CHECK(prof.fitted_gamma > 0.0);
  CHECK(prof.grid.size() == prof.magnitudes.size());
  const DecayProfile again = decay_profile(quad, 1e2, 1e4, 16, 1e-4, 1);
  CHECK(prof.magnitudes == again.magnitudes);
}
