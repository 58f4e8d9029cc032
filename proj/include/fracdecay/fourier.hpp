#pragma once

// Fourier side: the characteristic polynomial Phi, the truncated infinite
// product for mu^, transforms of atom measures and tails, oscillatory
// integrals with an a-priori error budget, and decay-envelope fitting.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/parallel.hpp"
#include "fracdecay/phase.hpp"

namespace fracdecay {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {

/// a * t reduced modulo 1 into roughly [-1/2, 1/2].
///
/// The product is split exactly as hi + lo with an FMA, hi is reduced by its
/// nearest integer (exact in binary), and lo is added back. This keeps the
/// phase accurate even when |a t| is far beyond 2^53.
inline double frac_product(double a, double t) noexcept {
  const double hi = a * t;
  const double lo = std::fma(a, t, -hi);
  return (hi - std::nearbyint(hi)) + lo;
}

/// exp(2 pi i f).
inline Complex cis_turns(double f) noexcept {
  const double angle = kTwoPi * f;
  return {std::cos(angle), std::sin(angle)};
}

inline void require_tol(double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw Error(ErrorCode::InvalidArgument, "tol must lie in (0, 1)");
}

/// An unevaluated sum hi + lo, |lo| <= ulp(hi) / 2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble dd_normalize(double hi, double lo) noexcept {
  const double s = hi + lo;
  return {s, lo - (s - hi)};
}

inline DoubleDouble dd_mul(DoubleDouble a, DoubleDouble b) noexcept {
  const double p = a.hi * b.hi;
  const double e = std::fma(a.hi, b.hi, -p) + (a.hi * b.lo + a.lo * b.hi);
  return dd_normalize(p, e);
}

/// x, refined by the exact fraction it was parsed from (2/3 is not a double;
/// without this the phase of Phi(3^20) drifts by ~1e-7 turns).
inline DoubleDouble dd_value(double x, const std::optional<Fraction>& exact) noexcept {
  if (!exact) return {x, 0.0};
  const auto p = static_cast<double>(exact->num);
  const auto q = static_cast<double>(exact->den);
  const double qx = q * x;
  const double err = std::fma(q, x, -qx);
  return {x, ((p - qx) - err) / q};
}

/// a * t reduced modulo 1, for double-double a and t.
inline double frac_product(DoubleDouble a, DoubleDouble t) noexcept {
  const double hi = a.hi * t.hi;
  const double lo = std::fma(a.hi, t.hi, -hi) + (a.hi * t.lo + a.lo * t.hi);
  return (hi - std::nearbyint(hi)) + lo;
}

inline std::vector<DoubleDouble> dd_translations(const IfsSpec& ifs) {
  std::vector<DoubleDouble> out;
  for (std::size_t j = 0; j < ifs.size(); ++j) {
    out.push_back(dd_value(ifs.translations[j], j < ifs.translations_exact.size() ? ifs.translations_exact[j]
                                                                                  : std::nullopt));
  }
  return out;
}

/// prod_{k >= 0} Phi(t rho^k), truncated once the remaining factors can move
/// the product by less than tol. Uses |Phi(s) - 1| <= 2 pi max|a| |s| and
/// |prod u_k - prod v_k| <= sum |u_k - v_k| for factors in the unit disc.
/// t rho^k runs as a double-double recurrence so the phases stay accurate.
inline Complex truncated_product(const IfsSpec& ifs, DoubleDouble t, double tol) {
  double amax = 0.0;
  for (double a : ifs.translations) amax = std::max(amax, std::abs(a));
  const double tail_factor = kTwoPi * amax / (1.0 - ifs.rho);
  const auto a = dd_translations(ifs);
  const DoubleDouble rho = dd_value(ifs.rho, ifs.rho_exact);
  Complex prod{1.0, 0.0};
  while (tail_factor * std::abs(t.hi) >= tol) {
    Complex phi{0.0, 0.0};
    for (std::size_t j = 0; j < ifs.size(); ++j) phi += ifs.probabilities[j] * cis_turns(frac_product(a[j], t));
    prod *= phi;
    t = dd_mul(t, rho);
  }
  return prod;
}

}  // namespace detail

/// Phi(t) = sum_j p_j exp(2 pi i a_j t).
inline Complex char_poly(const IfsSpec& ifs, double t) {
  const auto a = detail::dd_translations(ifs);
  Complex phi{0.0, 0.0};
  for (std::size_t j = 0; j < ifs.size(); ++j) {
    phi += ifs.probabilities[j] * detail::cis_turns(detail::frac_product(a[j], {t, 0.0}));
  }
  return phi;
}
inline Complex char_poly(const DerivedIfs& ifs, double t) { return char_poly(ifs.base, t); }

/// mu^(xi) = prod_{k >= 0} Phi(xi rho^k), with |result - mu^(xi)| < tol.
inline Complex mu_hat(const DerivedIfs& ifs, double xi, double tol) {
  detail::require_tol(tol);
  if (xi == 0.0) return {1.0, 0.0};
  return detail::truncated_product(ifs.base, {xi, 0.0}, tol);
}

/// eta^(xi) = prod_{k >= start_level} Phi(xi rho^k), with error below tol.
inline Complex tail_hat(const TailSpec& tail, double xi, double tol) {
  detail::require_tol(tol);
  if (xi == 0.0) return {1.0, 0.0};
  const detail::DoubleDouble rho = detail::dd_value(tail.base.rho, tail.base.rho_exact);
  detail::DoubleDouble t{xi, 0.0};
  for (int k = 0; k < tail.start_level; ++k) t = detail::dd_mul(t, rho);
  return detail::truncated_product(tail.base, t, tol);
}

/// sum over atoms of w exp(2 pi i xi x).
inline Complex mu_hat_discrete(const DiscreteMeasure& measure, double xi) {
  Complex acc{0.0, 0.0};
  for (const Atom& a : measure.atoms) acc += a.weight * detail::cis_turns(detail::frac_product(xi, a.position));
  return acc;
}

struct OscillatoryOptions {
  std::uint64_t atom_budget = kDefaultAtomBudget;
  unsigned threads = 1;
  bool plumbing = false;  // admit the linear identity phase
};

struct OscillatoryResult {
  Complex value;
  int level = 0;  // N of the approximant mu_N that was summed
  double error_bound = 0.0;  // a-priori bound on |value - integral|
};

/// Evaluates I(xi) = int exp(2 pi i xi phi(t)) g(t) dmu(t) for one fixed
/// (IFS, phase, weight) triple.
///
/// The integral is replaced by a sum over the m^(N+1) level-N cylinders, each
/// represented by the midpoint of its hull image x_c = atom + rho^(N+1) mid(K).
/// Every point of a cylinder lies within D = diam(eta_N) of x_c, and
///   |e(xi phi(x+y)) g(x+y) - e(xi phi(x)) g(x)|
///     <= (2 pi |xi| (sup|phi'| |y| + H0 y^2) + |y|) M,
/// so the sum is within (2 pi |xi| sup|phi'| D + 2 pi |xi| H0 D^2 + M D) M of
/// the integral. N is the smallest level bringing that below tol.
class OscillatoryIntegrator {
 public:
  OscillatoryIntegrator(DerivedIfs ifs, PhaseSpec phase, WeightSpec weight, OscillatoryOptions options = {})
      : ifs_(std::move(ifs)), phase_(std::move(phase)), weight_(std::move(weight)), options_(options) {
    constants_ = hull_constants(phase_, weight_, ifs_, options_.plumbing);
  }

  [[nodiscard]] const DerivedIfs& ifs() const noexcept { return ifs_; }
  [[nodiscard]] const PhaseSpec& phase() const noexcept { return phase_; }
  [[nodiscard]] const WeightSpec& weight() const noexcept { return weight_; }
  [[nodiscard]] const HullConstants& constants() const noexcept { return constants_; }
  [[nodiscard]] const OscillatoryOptions& options() const noexcept { return options_; }
  void set_threads(unsigned threads) noexcept { options_.threads = threads; }

  /// A-priori truncation error of the level-N sum at frequency xi.
  [[nodiscard]] double error_bound(double xi, int level) const {
    const double d = tail_diameter(ifs_, level + 1);
    const double ax = std::abs(xi);
    const auto& c = constants_;
    return (kTwoPi * ax * c.sup_phi1 * d + kTwoPi * ax * c.H0 * d * d + c.M * d) * c.M;
  }

  /// Smallest level whose error bound is <= tol; BudgetError when that level
  /// needs more atoms than the budget allows.
  [[nodiscard]] int level_for(double xi, double tol) const {
    detail::require_tol(tol);
    int level = 0;
    while (error_bound(xi, level) > tol) {
      ++level;
      const auto count = atom_count(ifs_.m(), level);
      if (!count || *count > options_.atom_budget) {
        const double best = error_bound(xi, level - 1);
        throw BudgetError("xi = " + std::to_string(xi) + " at tol " + std::to_string(tol) + " needs level " +
                              std::to_string(level) + " or more; best tol within budget is " +
                              std::to_string(best),
                          best);
      }
    }
    return level;
  }

  [[nodiscard]] OscillatoryResult operator()(double xi, double tol) const {
    const int level = level_for(xi, tol);
    return {at_level(xi, level), level, error_bound(xi, level)};
  }

  /// The cylinder-midpoint sum at a fixed level (no tolerance logic).
  [[nodiscard]] Complex at_level(double xi, int level) const {
    const std::size_t m = ifs_.m();
    const auto count = atom_count(m, level);
    if (!count || *count > options_.atom_budget) {
      throw BudgetError("level " + std::to_string(level) + " exceeds the atom budget",
                        std::numeric_limits<double>::quiet_NaN());
    }
    // Split the digit tree into a fixed number of prefixes so the summation
    // order, and therefore the rounding, is independent of the thread count.
    int prefix_digits = 0;
    std::size_t prefixes = 1;
    while (prefix_digits < level + 1 && prefixes < kTargetChunks) {
      prefixes *= m;
      ++prefix_digits;
    }
    const double offset = detail::repeated_power(ifs_.rho(), level + 1) * ifs_.hull.center();
    std::vector<Complex> partial(prefixes);
    parallel_for(prefixes, options_.threads, [&](std::size_t q) {
      double pos = offset;
      double w = 1.0;
      double scale = 1.0;
      std::size_t code = q;
      std::size_t div = prefixes / m;
      for (int k = 0; k < prefix_digits; ++k) {
        const std::size_t j = code / div;
        code %= div;
        if (div > 1) div /= m;
        pos += scale * ifs_.base.translations[j];
        w *= ifs_.base.probabilities[j];
        scale *= ifs_.rho();
      }
      partial[q] = descend(xi, level + 1 - prefix_digits, pos, w, scale);
    });
    Complex total{0.0, 0.0};
    for (const Complex& z : partial) total += z;
    return total;
  }

 private:
  static constexpr std::size_t kTargetChunks = 256;

  Complex descend(double xi, int remaining, double pos, double w, double scale) const {
    const auto& a = ifs_.base.translations;
    const auto& p = ifs_.base.probabilities;
    if (remaining == 0) {
      const double phase_turns = detail::frac_product(xi, phase_.value(pos));
      return (w * weight_.value(pos)) * detail::cis_turns(phase_turns);
    }
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < a.size(); ++j) {
      acc += descend(xi, remaining - 1, pos + scale * a[j], w * p[j], scale * ifs_.rho());
    }
    return acc;
  }

  DerivedIfs ifs_;
  PhaseSpec phase_;
  WeightSpec weight_;
  OscillatoryOptions options_;
  HullConstants constants_;
};

/// One-shot form of OscillatoryIntegrator.
inline OscillatoryResult oscillatory(const DerivedIfs& ifs, const PhaseSpec& phase, const WeightSpec& weight,
                                     double xi, double tol, OscillatoryOptions options = {}) {
  return OscillatoryIntegrator(ifs, phase, weight, options)(xi, tol);
}

/// Supremum of |I| over the dyadic window [2^id, 2^(id+1)).
struct DecayWindow {
  int id = 0;
  double lo = 0.0;
  double hi = 0.0;
  double sup = 0.0;
  double argmax = 0.0;
  std::size_t points = 0;
  bool complete = false;  // the window lies inside [xi_min, xi_max]
};

struct DecayProfile {
  double xi_min = 0.0;
  double xi_max = 0.0;
  std::vector<double> grid;
  std::vector<double> magnitudes;
  std::vector<int> levels;
  std::vector<double> error_bounds;
  std::vector<DecayWindow> windows;
  double fitted_gamma = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double fit_lo = 0.0;
  double fit_hi = 0.0;
};

struct ExponentFit {
  double gamma_hat = 0.0;
  double residual = 0.0;  // RMS residual of the log-log regression
  double intercept = 0.0;
  std::size_t windows = 0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
};

inline int window_id(double xi) { return static_cast<int>(std::floor(std::log2(xi))); }

/// Log-spaced grid xi_min * 10^(i / points_per_decade), last point clamped to xi_max.
inline std::vector<double> log_grid(double xi_min, double xi_max, int points_per_decade) {
  const double decades = std::log10(xi_max / xi_min);
  const auto steps = static_cast<std::size_t>(std::ceil(decades * points_per_decade - 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    grid[i] = xi_min * std::pow(10.0, static_cast<double>(i) / points_per_decade);
  }
  grid.back() = xi_max;
  return grid;
}

/// Recomputes the dyadic windows of a profile from its grid and magnitudes.
inline void assign_windows(DecayProfile& profile) {
  profile.windows.clear();
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const int id = window_id(profile.grid[i]);
    if (profile.windows.empty() || profile.windows.back().id != id) {
      DecayWindow w;
      w.id = id;
      w.lo = std::ldexp(1.0, id);
      w.hi = std::ldexp(1.0, id + 1);
      w.sup = -1.0;
      w.complete = w.lo >= profile.xi_min && w.hi <= profile.xi_max;
      profile.windows.push_back(w);
    }
    DecayWindow& w = profile.windows.back();
    ++w.points;
    if (profile.magnitudes[i] > w.sup) {
      w.sup = profile.magnitudes[i];
      w.argmax = profile.grid[i];
    }
  }
}

/// Least-squares slope of log(window sup) against log(window center
/// 2^(id + 1/2)) over complete windows; gamma_hat = -slope.
inline ExponentFit fit_exponent(const DecayProfile& profile) {
  std::vector<double> xs, ys;
  ExponentFit fit;
  for (const DecayWindow& w : profile.windows) {
    if (!w.complete || !(w.sup > 0.0)) continue;
    if (xs.empty()) fit.fit_lo = w.lo;
    fit.fit_hi = w.hi;
    xs.push_back((w.id + 0.5) * std::numbers::ln2);
    ys.push_back(std::log(w.sup));
  }
  if (xs.size() < 4) {
    throw Error(ErrorCode::InsufficientWindows,
                "need at least 4 complete dyadic windows, have " + std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * xs[i]);
    ss += r * r;
  }
  fit.gamma_hat = -slope;
  fit.residual = std::sqrt(ss / n);
  fit.windows = xs.size();
  return fit;
}

/// |I(xi)| on a logarithmic grid with dyadic window suprema and the fitted
/// envelope exponent. Frequencies are independent and are spread over
/// `threads` workers; the result does not depend on the thread count.
inline DecayProfile decay_profile(const OscillatoryIntegrator& integrator, double xi_min, double xi_max,
                                  int points_per_decade, double tol, unsigned threads = 1) {
  detail::require(xi_min > 0.0 && xi_max > xi_min, ErrorCode::InvalidArgument,
                  "decay profile needs 0 < xi_min < xi_max");
  detail::require(points_per_decade >= 16, ErrorCode::InvalidArgument, "points_per_decade must be >= 16");
  detail::require_tol(tol);
  DecayProfile profile;
  profile.xi_min = xi_min;
  profile.xi_max = xi_max;
  profile.grid = log_grid(xi_min, xi_max, points_per_decade);
  const std::size_t n = profile.grid.size();
  profile.magnitudes.resize(n);
  profile.levels.resize(n);
  profile.error_bounds.resize(n);

  OscillatoryIntegrator serial = integrator;
  serial.set_threads(1);
  parallel_for(n, threads, [&](std::size_t i) {
    const OscillatoryResult r = serial(profile.grid[i], tol);
    profile.magnitudes[i] = std::abs(r.value);
    profile.levels[i] = r.level;
    profile.error_bounds[i] = r.error_bound;
  });
  assign_windows(profile);
  const ExponentFit fit = fit_exponent(profile);
  profile.fitted_gamma = fit.gamma_hat;
  profile.residual = fit.residual;
  profile.fit_lo = fit.fit_lo;
  profile.fit_hi = fit.fit_hi;
  return profile;
}

}  // namespace fracdecay
