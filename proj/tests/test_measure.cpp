#include <algorithm>
#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "fracdecay/measure.hpp"
#include "oracles.hpp"

using namespace fracdecay;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorCode code_of(const IfsSpec& s) {
  try {
    validate(s);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("Cantor constants") {
  const DerivedIfs d = validate(oracle::cantor());
  CHECK(d.theta == 3.0);
  CHECK_THAT(d.alpha, WithinAbs(std::log(2.0) / std::log(3.0), 1e-15));
  CHECK_THAT(d.alpha, WithinAbs(0.63093, 1e-5));
  CHECK_THAT(d.delta, WithinAbs(0.75, 1e-15));
  CHECK_THAT(d.hull.lo, WithinAbs(0.0, 1e-15));
  CHECK_THAT(d.hull.hi, WithinAbs(1.0, 1e-15));
  CHECK(d.a_l > d.a_s);
  CHECK(d.a_l == 2.0 / 3.0);
  CHECK(d.a_s == 0.0);
}

TEST_CASE("derived constants follow their definitions on every test IFS") {
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs d = validate(spec);
    const double pmax = *std::max_element(spec.probabilities.begin(), spec.probabilities.end());
    const double pmin = *std::min_element(spec.probabilities.begin(), spec.probabilities.end());
    CHECK(d.p_l == pmax);
    CHECK(d.p_s == pmin);
    CHECK(d.theta > static_cast<double>(d.m()));
    CHECK((d.alpha > 0.0 && d.alpha < 1.0));
    CHECK((d.delta > 0.0 && d.delta < 1.0));
    CHECK(d.alpha == std::log(d.p_l) / std::log(d.rho()));
    CHECK(d.delta == 1.0 - 2.0 * d.p_l / (1.0 + d.theta));
    CHECK(d.a_l > d.a_s);
  }
}

TEST_CASE("validation errors") {
  CHECK(code_of(oracle::make(0.5, {0, 1}, {0.5, 0.5})) == ErrorCode::RatioOutOfRange);
  CHECK(code_of(oracle::make(0.0, {0, 1}, {0.5, 0.5})) == ErrorCode::RatioOutOfRange);
  CHECK(code_of(oracle::make(0.3, {0, 1}, {0.5, 0.4})) == ErrorCode::ProbabilityInvalid);
  CHECK(code_of(oracle::make(0.3, {0, 1}, {1.0, 0.0})) == ErrorCode::ProbabilityInvalid);
  CHECK(code_of(oracle::make(0.3, {0, 1}, {1.5, -0.5})) == ErrorCode::ProbabilityInvalid);
  CHECK(code_of(oracle::make(0.3, {0}, {1.0})) == ErrorCode::InvalidArgument);
  CHECK(code_of(oracle::make(0.3, {0, 1}, {1.0})) == ErrorCode::InvalidArgument);
  // hull [0, 1/0.7]; gap 0.1 < 0.3 * |hull|
  CHECK(code_of(oracle::make(0.3, {0, 0.1, 1}, {0.2, 0.3, 0.5})) == ErrorCode::SeparationFailed);
  // repeated translations can never separate
  CHECK(code_of(oracle::make(0.2, {0, 0, 1}, {0.2, 0.3, 0.5})) == ErrorCode::SeparationFailed);
}

TEST_CASE("hull test on two maps: any distinct pair separates when rho < 1/2") {
  // gap g vs rho * g / (1 - rho): passes iff rho < 1/2.
  CHECK_NOTHROW(validate(oracle::make(0.25, {0, 1.0 / 16.0}, {0.5, 0.5})));
  CHECK_NOTHROW(validate(oracle::make(0.25, {0, 0.25}, {0.5, 0.5})));
  CHECK_NOTHROW(validate(oracle::make(0.49, {0, 1}, {0.5, 0.5})));
}

TEST_CASE("(l, s) tie-breaking maximizes |a_l - a_s|") {
  // p_max shared by maps 0 and 2; p_min by 1 and 3
  const DerivedIfs d = validate(oracle::make(0.1, {0.0, 0.4, 0.8, 3.0}, {0.3, 0.2, 0.3, 0.2}));
  CHECK(d.l_index == 0);
  CHECK(d.s_index == 3);
  CHECK(d.a_l == 3.0);
  CHECK(d.a_s == 0.0);
  // larger probability on the smaller translation: a_l/a_s still ordered
  const DerivedIfs e = validate(oracle::make(0.2, {0.0, 1.0}, {0.7, 0.3}));
  CHECK(e.p_l == 0.7);
  CHECK(e.a_l == 1.0);
  CHECK(e.a_s == 0.0);
}

TEST_CASE("probabilities renormalized exactly") {
  const DerivedIfs d = validate(oracle::make(0.2, {0, 1}, {0.3 + 4e-13, 0.7}));
  double s = 0.0;
  for (double p : d.base.probabilities) s += p;
  CHECK_THAT(s, WithinAbs(1.0, 2e-16));
}

TEST_CASE("level atoms of the Cantor measure") {
  const DerivedIfs d = validate(oracle::cantor());
  const DiscreteMeasure n0 = level_atoms(d, 0);
  REQUIRE(n0.atoms.size() == 2);
  CHECK(n0.atoms[0].position == 0.0);
  CHECK(n0.atoms[1].position == 2.0 / 3.0);
  CHECK(n0.atoms[0].weight == 0.5);

  const DiscreteMeasure n1 = level_atoms(d, 1);
  REQUIRE(n1.atoms.size() == 4);
  const double expect[] = {0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0};
  for (int i = 0; i < 4; ++i) {
    CHECK_THAT(n1.atoms[static_cast<std::size_t>(i)].position, WithinAbs(expect[i], 1e-15));
    CHECK(n1.atoms[static_cast<std::size_t>(i)].weight == 0.25);
  }
}

TEST_CASE("level atoms: count, weight sum, order, gaps, oracle positions") {
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs d = validate(spec);
    for (int n = 0; n <= 5; ++n) {
      const DiscreteMeasure mu = level_atoms(d, n);
      CHECK(mu.atoms.size() == static_cast<std::size_t>(std::pow(d.m(), n + 1)));
      CHECK_THAT(mu.total_weight(), WithinAbs(1.0, 1e-12));
      const double gap = detail::repeated_power(d.rho(), n) * d.separation_margin;
      for (std::size_t i = 1; i < mu.atoms.size(); ++i) {
        CHECK(mu.atoms[i].position - mu.atoms[i - 1].position >= gap * (1 - 1e-9));
      }
      auto ref = oracle::atoms(spec, n);
      std::sort(ref.begin(), ref.end());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK_THAT(mu.atoms[i].position, WithinAbs(static_cast<double>(ref[i].first), 1e-13));
        CHECK_THAT(mu.atoms[i].weight, WithinRel(static_cast<double>(ref[i].second), 1e-13));
      }
    }
  }
}

TEST_CASE("atom budget") {
  const DerivedIfs d = validate(oracle::cantor());
  try {
    level_atoms(d, 20, 1000);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetError& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
  CHECK_FALSE(atom_count(4, 40).has_value());
}

TEST_CASE("split and tail diameter") {
  const DerivedIfs d = validate(oracle::cantor());
  const auto [mu, tail] = split(d, 3);
  CHECK(mu.level == 3);
  CHECK(tail.start_level == 4);
  CHECK_THAT(tail.diameter, WithinAbs(1.0 / 81.0, 1e-16));
  for (const auto& spec : oracle::test_ifs()) {
    const DerivedIfs e = validate(spec);
    for (int n = 0; n < 30; ++n) {
      CHECK_THAT(tail_diameter(e, n + 1), WithinRel(tail_diameter(e, n) * e.rho(), 1e-14));
    }
  }
}

TEST_CASE("sampling") {
  const DerivedIfs d = validate(oracle::cantor());
  const int digits = min_sample_digits(d);
  CHECK(sample(d, 7, 0, digits).empty());
  CHECK_THROWS_AS(sample(d, 7, 10, 5), Error);

  const auto xs = sample(d, 7, 10000, digits);
  CHECK(xs == sample(d, 7, 10000, digits));
  CHECK(xs != sample(d, 8, 10000, digits));
  double mean = 0.0;
  for (double x : xs) {
    CHECK((x >= 0.0 && x <= 1.0));
    mean += x;
  }
  mean /= static_cast<double>(xs.size());
  // Var of the Cantor measure is 1/8
  const double sigma = std::sqrt(0.125 / static_cast<double>(xs.size()));
  CHECK(std::abs(mean - 0.5) < 3 * sigma);
}

TEST_CASE("sample digits follow the probabilities") {
  const DerivedIfs d = validate(oracle::make(0.25, {0.0, 0.4, 1.0}, {0.2, 0.5, 0.3}));
  std::size_t counts[3] = {0, 0, 0};
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[sample_digits(d, 3, static_cast<std::uint64_t>(i), 1)[0]];
  const double p[3] = {0.2, 0.5, 0.3};
  for (int j = 0; j < 3; ++j) {
    const double f = static_cast<double>(counts[j]) / n;
    CHECK(std::abs(f - p[j]) < 4 * std::sqrt(p[j] * (1 - p[j]) / n));
  }
}

TEST_CASE("fraction parsing") {
  auto f = Fraction::parse("1/3");
  REQUIRE(f);
  CHECK(f->num == 1);
  CHECK(f->den == 3);
  CHECK(Fraction::parse("-2/-6")->num == 2);
  CHECK(Fraction::parse("5")->den == 1);
  CHECK_FALSE(Fraction::parse("1/0"));
  CHECK_FALSE(Fraction::parse("0.5"));
  CHECK_FALSE(Fraction::parse("a/b"));
}
