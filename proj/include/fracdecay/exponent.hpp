#pragma once

// The explicit decay exponent
//   gamma = max over feasible (beta, eps) of min{2 beta - 1, (1 - beta) eps log(delta) / log(rho)},
// feasible meaning 1/2 < beta < 1, (2 - alpha) beta < 1, 0 < eps < delta and
//   omega(eps) (1 - beta) / log(rho) + 1 - (2 - alpha) beta > (1 - beta) eps log(delta) / log(rho).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include "fracdecay/erdos.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"

namespace fracdecay {

/// The three constants the exponent depends on.
struct ExponentProblem {
  double rho = 0.0;
  double alpha = 0.0;
  double delta = 0.0;

  static ExponentProblem from(const DerivedIfs& ifs) { return {ifs.rho(), ifs.alpha, ifs.delta}; }
  [[nodiscard]] double theta() const noexcept { return 1.0 / rho; }
  /// log(delta) / log(rho) > 0.
  [[nodiscard]] double decay_ratio() const { return std::log(delta) / std::log(rho); }
};

/// Strict inequalities are enforced with this margin.
inline constexpr double kFeasibilityMargin = 1e-9;

enum class Binding { Beta, Epsilon, Tie };

inline const char* to_string(Binding b) {
  switch (b) {
    case Binding::Beta: return "2beta-1";
    case Binding::Epsilon: return "epsilon";
    case Binding::Tie: return "tie";
  }
  return "?";
}

struct ExponentSolution {
  double beta = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  Binding binding = Binding::Tie;
  double feasibility_slack = 0.0;
};

struct Feasibility {
  bool ok = false;
  double slack = 0.0;
};

inline double gamma_objective(double beta, double epsilon, const ExponentProblem& pb) {
  return std::min(2.0 * beta - 1.0, (1.0 - beta) * epsilon * pb.decay_ratio());
}
inline double gamma_objective(double beta, double epsilon, const DerivedIfs& ifs) {
  return gamma_objective(beta, epsilon, ExponentProblem::from(ifs));
}

/// [omega(eps)(1 - beta)/log rho + 1 - (2 - alpha) beta] - (1 - beta) eps log delta / log rho.
inline double feasibility_slack(double beta, double epsilon, const ExponentProblem& pb) {
  const double log_rho = std::log(pb.rho);
  return omega(epsilon, pb.theta()) * (1.0 - beta) / log_rho + 1.0 - (2.0 - pb.alpha) * beta -
         (1.0 - beta) * epsilon * pb.decay_ratio();
}

inline Feasibility feasible(double beta, double epsilon, const ExponentProblem& pb) {
  constexpr double m = kFeasibilityMargin;
  const bool box = beta > 0.5 + m && beta < 1.0 - m && (2.0 - pb.alpha) * beta < 1.0 - m && epsilon > m &&
                   epsilon < pb.delta - m;
  if (!(epsilon > 0.0 && epsilon < 1.0)) return {false, -std::numeric_limits<double>::infinity()};
  const double slack = feasibility_slack(beta, epsilon, pb);
  return {box && slack > m, slack};
}
inline Feasibility feasible(double beta, double epsilon, const DerivedIfs& ifs) {
  return feasible(beta, epsilon, ExponentProblem::from(ifs));
}

namespace detail {

/// Upper end of the feasible beta range from the box constraints alone.
inline double beta_upper(const ExponentProblem& pb) {
  return std::min(1.0 - kFeasibilityMargin, (1.0 - kFeasibilityMargin) / (2.0 - pb.alpha));
}

/// Largest feasible eps for this beta, or a negative value if none.
///
/// The slack is strictly decreasing in eps on (0, delta): omega is increasing
/// there because delta < (theta + 2)^2 / (1 + (theta + 2)^2), and log rho < 0.
inline double max_feasible_epsilon(double beta, const ExponentProblem& pb) {
  constexpr double m = kFeasibilityMargin;
  const double lo0 = 2.0 * m;
  const double hi0 = pb.delta - 2.0 * m;
  if (!feasible(beta, lo0, pb).ok) return -1.0;
  if (feasible(beta, hi0, pb).ok) return hi0;
  double lo = lo0, hi = hi0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(beta, mid, pb).ok ? lo : hi) = mid;
  }
  return lo;
}

/// Best eps for a given beta: the largest feasible one, cut back to where the
/// eps-branch stops improving the minimum (smallest eps attaining the value).
inline double best_epsilon(double beta, const ExponentProblem& pb) {
  const double emax = max_feasible_epsilon(beta, pb);
  if (emax < 0.0) return emax;
  const double tie = (2.0 * beta - 1.0) / ((1.0 - beta) * pb.decay_ratio());
  return std::min(emax, std::max(tie, 2.0 * kFeasibilityMargin));
}

inline double profile_value(double beta, const ExponentProblem& pb) {
  const double e = best_epsilon(beta, pb);
  if (e < 0.0 || !feasible(beta, e, pb).ok) return -std::numeric_limits<double>::infinity();
  return gamma_objective(beta, e, pb);
}

inline ExponentSolution make_solution(double beta, double epsilon, const ExponentProblem& pb) {
  ExponentSolution s;
  s.beta = beta;
  s.epsilon = epsilon;
  s.gamma = gamma_objective(beta, epsilon, pb);
  const double b1 = 2.0 * beta - 1.0;
  const double b2 = (1.0 - beta) * epsilon * pb.decay_ratio();
  s.binding = std::abs(b1 - b2) <= 1e-6 ? Binding::Tie : (b1 < b2 ? Binding::Beta : Binding::Epsilon);
  s.feasibility_slack = feasibility_slack(beta, epsilon, pb);
  return s;
}

}  // namespace detail

/// Maximizes the exponent over the feasible set.
///
/// A resolution x resolution cell-centred grid over (1/2, 1) x (0, delta) picks
/// the best feasible point (ties: smallest beta, then smallest eps). The
/// result is then refined coordinate-wise: for fixed beta the best eps is the
/// largest feasible one (the objective is non-decreasing in eps and the
/// feasible eps form an interval), found by bisection; beta is then optimized
/// by golden-section search on that profile, which is unimodal (an increasing
/// branch against a decreasing one). The refined point is kept only if it
/// beats the grid point.
inline ExponentSolution optimize_gamma(const ExponentProblem& pb, int resolution = 400) {
  detail::require(resolution >= 100, ErrorCode::InvalidArgument, "resolution must be >= 100");
  detail::require(pb.rho > 0.0 && pb.rho < 1.0 && pb.alpha > 0.0 && pb.alpha < 1.0 && pb.delta > 0.0 &&
                      pb.delta < 1.0,
                  ErrorCode::InvalidArgument, "exponent problem needs rho, alpha, delta in (0, 1)");
  const auto n = static_cast<std::size_t>(resolution);
  double best = -std::numeric_limits<double>::infinity();
  double best_beta = 0.0, best_eps = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = 0.5 + 0.5 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double eps = pb.delta * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      if (!feasible(beta, eps, pb).ok) continue;
      const double g = gamma_objective(beta, eps, pb);
      if (g > best) {
        best = g;
        best_beta = beta;
        best_eps = eps;
      }
    }
  }
  if (!(best > -std::numeric_limits<double>::infinity())) {
    throw Error(ErrorCode::NoFeasiblePoint, "no feasible (beta, eps) on the grid");
  }

  // golden-section on beta within two grid cells of the grid optimum
  const double cell = 0.5 / static_cast<double>(n);
  double lo = std::max(0.5 + 2.0 * kFeasibilityMargin, best_beta - 2.0 * cell);
  double hi = std::min(detail::beta_upper(pb), best_beta + 2.0 * cell);
  const double inv_phi = std::numbers::phi - 1.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = detail::profile_value(c, pb);
  double fd = detail::profile_value(d, pb);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = detail::profile_value(c, pb);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = detail::profile_value(d, pb);
    }
  }
  const double beta_ref = fc >= fd ? c : d;
  const double eps_ref = detail::best_epsilon(beta_ref, pb);
  if (eps_ref > 0.0 && feasible(beta_ref, eps_ref, pb).ok && gamma_objective(beta_ref, eps_ref, pb) > best) {
    return detail::make_solution(beta_ref, eps_ref, pb);
  }
  return detail::make_solution(best_beta, best_eps, pb);
}

inline ExponentSolution optimize_gamma(const DerivedIfs& ifs, int resolution = 400) {
  return optimize_gamma(ExponentProblem::from(ifs), resolution);
}

}  // namespace fracdecay
