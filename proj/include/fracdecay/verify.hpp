#pragma once

// Headless invariant battery behind `fracdecay verify`. Each check is cheap
// (the whole battery runs in seconds) and reports a one-line detail.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracdecay/config.hpp"
#include "fracdecay/erdos.hpp"
#include "fracdecay/exponent.hpp"
#include "fracdecay/fourier.hpp"
#include "fracdecay/io.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/normality.hpp"
#include "fracdecay/phase.hpp"
#include "fracdecay/rng.hpp"

namespace fracdecay {

struct CheckResult {
  std::string module;
  std::string name;
  bool ok = false;
  std::string detail;
};

namespace detail {

class Battery {
 public:
  void run(const std::string& module, const std::string& name, const std::function<std::string(bool&)>& body) {
    CheckResult r{module, name, false, {}};
    try {
      bool ok = true;
      r.detail = body(ok);
      r.ok = ok;
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  std::vector<CheckResult> results;
};

}  // namespace detail

inline std::vector<CheckResult> run_invariants(const ExperimentConfig& cfg) {
  detail::Battery b;
  const DerivedIfs ifs = validate(cfg.ifs);
  const double tol = 1e-9;
  const CounterRng rng(cfg.seed);

  // --- measure
  b.run("measure", "level_atoms weights, count and gaps", [&](bool& ok) {
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
      const auto count = atom_count(ifs.m(), n);
      if (!count || *count > 2'000'000) break;
      const DiscreteMeasure mu = level_atoms(ifs, n);
      worst = std::max(worst, std::abs(mu.total_weight() - 1.0));
      ok = ok && mu.atoms.size() == *count;
      const double min_gap = detail::repeated_power(ifs.rho(), n) * ifs.separation_margin;
      for (std::size_t i = 1; i < mu.atoms.size(); ++i) {
        ok = ok && mu.atoms[i].position - mu.atoms[i - 1].position >= min_gap * (1.0 - 1e-9);
      }
    }
    ok = ok && worst <= 1e-12;
    return "max |weight sum - 1| = " + fmt17(worst);
  });
  b.run("measure", "derived constants recompute exactly", [&](bool& ok) {
    const DerivedIfs again = validate(cfg.ifs);
    ok = again.alpha == ifs.alpha && again.delta == ifs.delta && again.theta == ifs.theta &&
         ifs.alpha == std::log(ifs.p_l) / std::log(ifs.rho()) && ifs.theta == 1.0 / ifs.rho() &&
         ifs.delta == 1.0 - 2.0 * ifs.p_l / (1.0 + ifs.theta);
    return "alpha = " + fmt17(ifs.alpha) + ", delta = " + fmt17(ifs.delta);
  });
  b.run("measure", "tail diameter scales by rho", [&](bool& ok) {
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      worst = std::max(worst, std::abs(tail_diameter(ifs, n + 1) / tail_diameter(ifs, n) - ifs.rho()));
    }
    ok = worst <= 1e-15;
    return "max deviation " + fmt17(worst);
  });
  b.run("measure", "sample determinism and hull", [&](bool& ok) {
    const int digits = min_sample_digits(ifs);
    const auto a = sample(ifs, cfg.seed, 200, digits);
    const auto c = sample(ifs, cfg.seed, 200, digits);
    ok = a == c;
    for (double x : a) ok = ok && ifs.hull.lo - 1e-12 <= x && x <= ifs.hull.hi + 1e-12;
    return "200 samples";
  });

  // --- fourier
  b.run("fourier", "functional equation", [&](bool& ok) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const double xi = -1e5 + 2e5 * rng.uniform(1000, i);
      const Complex lhs = mu_hat(ifs, xi, tol);
      const Complex rhs = char_poly(ifs, xi) * mu_hat(ifs, ifs.rho() * xi, tol);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    ok = worst < 3 * tol;
    return "max defect " + fmt17(worst);
  });
  b.run("fourier", "convolution factorization", [&](bool& ok) {
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
      const auto count = atom_count(ifs.m(), n);
      if (!count || *count > 2'000'000) break;
      const auto [mu, tail] = split(ifs, n);
      for (double xi : {1.0, 10.0, 100.0, 1000.0}) {
        worst = std::max(worst, std::abs(mu_hat_discrete(mu, xi) * tail_hat(tail, xi, tol) - mu_hat(ifs, xi, tol)));
      }
    }
    ok = worst < 2 * tol;
    return "max defect " + fmt17(worst);
  });
  b.run("fourier", "|mu_hat| <= 1 + tol, mu_hat(0) = 1, Hermitian", [&](bool& ok) {
    ok = mu_hat(ifs, 0.0, tol) == Complex(1.0, 0.0);
    double worst_mod = 0.0, worst_herm = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const double xi = 1e4 * rng.uniform(2000, i);
      const Complex z = mu_hat(ifs, xi, tol);
      worst_mod = std::max(worst_mod, std::abs(z));
      worst_herm = std::max(worst_herm, std::abs(mu_hat(ifs, -xi, tol) - std::conj(z)));
    }
    ok = ok && worst_mod <= 1.0 + tol && worst_herm < 2 * tol;
    return "max |mu_hat| = " + fmt17(worst_mod) + ", Hermitian defect " + fmt17(worst_herm);
  });

  const bool plumbing = cfg.plumbing || cfg.phase.linear();
  const OscillatoryIntegrator osc(ifs, cfg.phase, cfg.weight, OscillatoryOptions{kDefaultAtomBudget, cfg.threads, plumbing});
  b.run("fourier", "oscillatory self-consistency (level doubling proxy)", [&](bool& ok) {
    const double otol = 1e-4;
    double worst = 0.0;
    for (double xi : {1.0, 10.0, 100.0}) {
      const OscillatoryResult r = osc(xi, otol);
      const int deeper = std::min(2 * r.level + 1, r.level + 4);
      const auto count = atom_count(ifs.m(), deeper);
      if (!count || *count > 5'000'000) continue;
      worst = std::max(worst, std::abs(osc.at_level(xi, deeper) - r.value));
    }
    ok = worst < otol;
    return "max change " + fmt17(worst);
  });
  b.run("fourier", "oscillatory Hermitian symmetry and total mass", [&](bool& ok) {
    double worst = 0.0;
    for (double xi : {3.0, 30.0, 300.0}) {
      worst = std::max(worst, std::abs(osc(-xi, 1e-4).value - std::conj(osc(xi, 1e-4).value)));
    }
    ok = worst < 2e-4;
    if (cfg.weight.is_constant() && cfg.weight.value(0.0) == 1.0) {
      ok = ok && std::abs(osc(0.0, 1e-4).value - Complex(1.0, 0.0)) < 1e-12;
    }
    return "max defect " + fmt17(worst);
  });

  // --- phase
  b.run("phase", "hull constants sound against grid", [&](bool& ok) {
    const HullConstants c = hull_constants(cfg.phase, cfg.weight, ifs, plumbing);
    const HullConstants g = hull_constants_grid(cfg.phase, cfg.weight, ifs);
    const double eps = 1e-12;
    ok = c.H0 >= g.H0 - eps && c.M >= g.M - eps && c.sup_phi1 >= g.sup_phi1 - eps && c.H1 <= g.H1 + eps &&
         c.H2 >= g.H2 - eps && c.H2 >= c.H1;
    return "H0 = " + fmt17(c.H0) + ", M = " + fmt17(c.M) + ", H1 = " + fmt17(c.H1) + ", H2 = " + fmt17(c.H2);
  });

  // --- erdos
  b.run("erdos", "cover oracle and count bound", [&](bool& ok) {
    CoverConfig cc = cfg.cover.cover;
    cc.N = std::min(cc.N, 8);
    const CoverResult cover = build_cover(cc);
    const auto grid = static_cast<std::size_t>(std::ceil(10.0 * cc.scale() * cc.range.width())) + 1;
    const CoverReport rep = verify_cover(cc, grid, cover, false);
    ok = rep.ok() && cover.max_children <= static_cast<std::size_t>(std::floor(cc.theta)) + 2;
    return std::to_string(rep.violations.size()) + " violations, count " + std::to_string(rep.count) + " <= " +
           fmt17(rep.bound);
  });
  b.run("erdos", "forced chains follow true orbits", [&](bool& ok) {
    const CoverConfig cc{1.0, cfg.cover.cover.theta, 0.3, 10, {1.0, 2.0}};
    std::size_t tested = 0;
    for (std::uint64_t i = 0; i < 20000 && tested < 200; ++i) {
      const double x = 1.0 + rng.uniform(3000, i);
      const Orbit o = orbit_digits(x, cc);
      if (o.good_count != cc.N) continue;
      ++tested;
      for (int k = 1; k < cc.N; ++k) {
        const auto f = forced_child(cc.theta, o.r[static_cast<std::size_t>(k - 1)]);
        ok = ok && f && *f == o.r[static_cast<std::size_t>(k)];
      }
    }
    return std::to_string(tested) + " all-good orbits";
  });

  // --- exponent
  b.run("exponent", "optimizer output feasible and exact", [&](bool& ok) {
    const ExponentSolution s = optimize_gamma(ifs, 200);
    const auto f = feasible(s.beta, s.epsilon, ifs);
    ok = f.ok && f.slack > 0.0 && s.gamma == gamma_objective(s.beta, s.epsilon, ifs) && s.gamma > 0.0;
    return "gamma* = " + fmt17(s.gamma);
  });

  // --- normality
  b.run("normality", "incremental DEL sums equal naive recomputation", [&](bool& ok) {
    const TransformEval eval = [&](double xi) { return mu_hat(ifs, xi, 1e-12); };
    const auto inc = del_partial_sums(eval, 1, SequenceSpec::identity(), 40);
    const auto naive = del_partial_sums_naive(eval, 1, SequenceSpec::identity(), 40);
    double worst = 0.0;
    for (std::size_t i = 0; i < inc.size(); ++i) worst = std::max(worst, std::abs(inc[i].partial - naive[i].partial));
    ok = worst < 1e-9;
    return "max difference " + fmt17(worst);
  });
  b.run("normality", "digit tables are distributions", [&](bool& ok) {
    const auto xs = sample(ifs, cfg.seed, 500, min_sample_digits(ifs));
    const DigitTable t = digit_frequencies(xs, 3, 20);
    double sum = 0.0;
    for (double f : t.frequencies()) sum += f;
    ok = std::abs(sum - 1.0) < 1e-12;
    return "sum " + fmt17(sum);
  });

  return b.results;
}

inline nlohmann::json to_json(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j = {{"module", r.module}, {"name", r.name}, {"ok", r.ok}, {"detail", r.detail}};
    checks.push_back(j);
    if (!r.ok) violations.push_back(j);
  }
  return {{"checks", checks}, {"violations", violations}, {"ok", violations.empty()}};
}

}  // namespace fracdecay
