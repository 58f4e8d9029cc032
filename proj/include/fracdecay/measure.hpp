#pragma once

// Homogeneous self-similar measures mu = sum_j p_j (rho x + a_j)_* mu on the
// line: parameter validation, level-N convolution approximants, the split
// mu = mu_N * eta_N, and reproducible random sampling.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/rng.hpp"

namespace fracdecay {

/// An exact rational p/q, kept next to a parameter's double value when the
/// user wrote the parameter as a fraction ("1/3"). High-precision sampling
/// uses it; everything else uses the double.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  /// Parses "p/q" or a plain integer. Returns nullopt for anything else.
  static std::optional<Fraction> parse(std::string_view text) {
    auto parse_int = [](std::string_view s, std::int64_t& out) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      if (!s.empty() && s.front() == '+') s.remove_prefix(1);
      if (s.empty()) return false;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      return ec == std::errc{} && ptr == s.data() + s.size();
    };
    Fraction f;
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
      if (!parse_int(text, f.num)) return std::nullopt;
      return f;
    }
    if (!parse_int(text.substr(0, slash), f.num) || !parse_int(text.substr(slash + 1), f.den)) return std::nullopt;
    if (f.den == 0) return std::nullopt;
    if (f.den < 0) {
      f.num = -f.num;
      f.den = -f.den;
    }
    return f;
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double width() const noexcept { return hi - lo; }
  [[nodiscard]] double center() const noexcept { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  /// The interval scaled by `factor` about its center (2K in the decay proof).
  [[nodiscard]] Interval dilated(double factor) const noexcept {
    const double half = 0.5 * factor * width();
    return {center() - half, center() + half};
  }
};

/// Raw IFS parameters {rho x + a_j} with weights p_j.
struct IfsSpec {
  double rho = 0.0;
  std::vector<double> translations;
  std::vector<double> probabilities;
  // Exact rational forms, when known. Empty vector / nullopt means "use the
  // double value", which is itself an exact binary rational.
  std::optional<Fraction> rho_exact;
  std::vector<std::optional<Fraction>> translations_exact;

  [[nodiscard]] std::size_t size() const noexcept { return translations.size(); }
};

/// A validated IFS together with the constants the decay argument uses.
struct DerivedIfs {
  IfsSpec base;
  double theta = 0.0;  // 1 / rho
  std::size_t l_index = 0;  // a maximum-probability map
  std::size_t s_index = 0;  // a minimum-probability map
  double p_l = 0.0;
  double p_s = 0.0;
  double a_l = 0.0;  // larger translation of the selected pair
  double a_s = 0.0;  // smaller translation of the selected pair
  double alpha = 0.0;  // log p_l / log rho
  double delta = 0.0;  // 1 - 2 p_l / (1 + theta)
  Interval hull;  // smallest closed interval containing the attractor
  double separation_margin = 0.0;  // min sorted gap - rho * |hull| (> 0)

  [[nodiscard]] double rho() const noexcept { return base.rho; }
  [[nodiscard]] std::size_t m() const noexcept { return base.size(); }
  [[nodiscard]] double max_abs_translation() const noexcept {
    double r = 0.0;
    for (double a : base.translations) r = std::max(r, std::abs(a));
    return r;
  }
  [[nodiscard]] double translation_spread() const noexcept {
    const auto [lo, hi] = std::minmax_element(base.translations.begin(), base.translations.end());
    return *hi - *lo;
  }
};

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

/// The finite measure mu_N = conv_{k=0..N} (sum_j p_j delta_{rho^k a_j}).
struct DiscreteMeasure {
  std::vector<Atom> atoms;  // sorted by position
  int level = 0;

  [[nodiscard]] double total_weight() const {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.weight;
    return s;
  }
};

/// The tail eta_N = conv_{k >= start_level} (sum_j p_j delta_{rho^k a_j}).
struct TailSpec {
  IfsSpec base;
  int start_level = 0;
  double diameter = 0.0;  // length of the convex hull of supp(eta)
};

inline constexpr std::uint64_t kDefaultAtomBudget = 100'000'000ULL;

namespace detail {

/// Index pair (l, s): l among argmax p, s among argmin p, l != s, maximizing
/// |a_l - a_s|; ties keep the first pair in lexicographic order.
inline std::pair<std::size_t, std::size_t> select_extreme_pair(const IfsSpec& spec) {
  const auto& p = spec.probabilities;
  const auto& a = spec.translations;
  const double pmax = *std::max_element(p.begin(), p.end());
  const double pmin = *std::min_element(p.begin(), p.end());
  std::pair<std::size_t, std::size_t> best{0, 0};
  double best_gap = -1.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    if (p[l] != pmax) continue;
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (s == l || p[s] != pmin) continue;
      const double gap = std::abs(a[l] - a[s]);
      if (gap > best_gap) {
        best_gap = gap;
        best = {l, s};
      }
    }
  }
  if (best_gap <= 0.0) {
    throw Error(ErrorCode::DegenerateTranslations,
                "every max/min-probability translation pair coincides; a_l > a_s is impossible");
  }
  return best;
}

/// rho^n by repeated multiplication, so that power(n + 1) == power(n) * rho bitwise.
inline double repeated_power(double rho, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= rho;
  return r;
}

}  // namespace detail

/// Validates raw parameters and derives theta, alpha, delta, the hull and the
/// (l, s) pair. Probabilities are renormalized exactly after the 1e-12 check.
///
/// Strong separation is certified by the hull test: the images
/// [rho A + a_j, rho B + a_j] of the hull [A, B] are pairwise disjoint. This is
/// sufficient but not necessary.
inline DerivedIfs validate(IfsSpec spec) {
  const std::size_t m = spec.translations.size();
  detail::require(m >= 2, ErrorCode::InvalidArgument, "an IFS needs at least two maps");
  detail::require(spec.probabilities.size() == m, ErrorCode::InvalidArgument,
                  "translations and probabilities must have equal length");
  detail::require(spec.translations_exact.empty() || spec.translations_exact.size() == m,
                  ErrorCode::InvalidArgument, "exact translations must match translations in length");
  if (!(spec.rho > 0.0 && spec.rho < 1.0 / static_cast<double>(m)) || !std::isfinite(spec.rho)) {
    throw Error(ErrorCode::RatioOutOfRange,
                "rho = " + std::to_string(spec.rho) + " must lie in (0, 1/m) with m = " + std::to_string(m));
  }
  for (double a : spec.translations) {
    detail::require(std::isfinite(a), ErrorCode::InvalidArgument, "translations must be finite");
  }
  double psum = 0.0;
  for (double p : spec.probabilities) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::ProbabilityInvalid, "probabilities must be positive and finite");
    }
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-12) {
    throw Error(ErrorCode::ProbabilityInvalid, "probabilities sum to " + std::to_string(psum) + ", not 1");
  }
  for (double& p : spec.probabilities) p /= psum;

  DerivedIfs d;
  const double rho = spec.rho;
  const auto [amin, amax] = std::minmax_element(spec.translations.begin(), spec.translations.end());
  d.hull = {*amin / (1.0 - rho), *amax / (1.0 - rho)};

  std::vector<double> sorted = spec.translations;
  std::sort(sorted.begin(), sorted.end());
  double min_gap = sorted[1] - sorted[0];
  for (std::size_t j = 1; j + 1 < m; ++j) min_gap = std::min(min_gap, sorted[j + 1] - sorted[j]);
  d.separation_margin = min_gap - rho * d.hull.width();
  if (!(d.separation_margin > 0.0)) {
    throw Error(ErrorCode::SeparationFailed,
                "hull images overlap: minimal translation gap " + std::to_string(min_gap) +
                    " <= rho * |hull| = " + std::to_string(rho * d.hull.width()));
  }

  auto [l, s] = detail::select_extreme_pair(spec);
  d.l_index = l;
  d.s_index = s;
  d.p_l = spec.probabilities[l];
  d.p_s = spec.probabilities[s];
  d.a_l = std::max(spec.translations[l], spec.translations[s]);
  d.a_s = std::min(spec.translations[l], spec.translations[s]);
  d.theta = 1.0 / rho;
  d.alpha = std::log(d.p_l) / std::log(rho);
  d.delta = 1.0 - 2.0 * d.p_l / (1.0 + d.theta);
  d.base = std::move(spec);
  return d;
}

/// Diameter of supp(eta) when the tail starts at rho^start_level.
inline double tail_diameter(const DerivedIfs& ifs, int start_level) {
  return detail::repeated_power(ifs.rho(), start_level) * (ifs.translation_spread() / (1.0 - ifs.rho()));
}

/// m^(N+1), or nullopt when it overflows 64 bits.
inline std::optional<std::uint64_t> atom_count(std::size_t m, int level) {
  std::uint64_t count = 1;
  for (int k = 0; k <= level; ++k) {
    if (count > UINT64_MAX / m) return std::nullopt;
    count *= m;
  }
  return count;
}

/// All sums sum_{k=0..N} rho^k a_{j_k} with weights prod_k p_{j_k}, sorted.
inline DiscreteMeasure level_atoms(const DerivedIfs& ifs, int level,
                                   std::uint64_t budget = kDefaultAtomBudget) {
  detail::require(level >= 0, ErrorCode::InvalidArgument, "level must be non-negative");
  const std::size_t m = ifs.m();
  const auto count = atom_count(m, level);
  if (!count || *count > budget) {
    throw BudgetError("level " + std::to_string(level) + " needs m^(N+1) atoms, over the budget of " +
                          std::to_string(budget),
                      std::numeric_limits<double>::quiet_NaN());
  }
  std::vector<Atom> atoms{{0.0, 1.0}};
  atoms.reserve(*count);
  double scale = 1.0;
  for (int k = 0; k <= level; ++k) {
    std::vector<Atom> next;
    next.reserve(atoms.size() * m);
    for (const Atom& at : atoms) {
      for (std::size_t j = 0; j < m; ++j) {
        next.push_back({at.position + scale * ifs.base.translations[j], at.weight * ifs.base.probabilities[j]});
      }
    }
    atoms = std::move(next);
    scale *= ifs.rho();
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.position < y.position; });
  return {std::move(atoms), level};
}

inline TailSpec tail_spec(const DerivedIfs& ifs, int start_level) {
  detail::require(start_level >= 0, ErrorCode::InvalidArgument, "start level must be non-negative");
  return {ifs.base, start_level, tail_diameter(ifs, start_level)};
}

/// mu = mu_N * eta_N with eta_N starting at level N + 1.
inline std::pair<DiscreteMeasure, TailSpec> split(const DerivedIfs& ifs, int level,
                                                  std::uint64_t budget = kDefaultAtomBudget) {
  return {level_atoms(ifs, level, budget), tail_spec(ifs, level + 1)};
}

/// Smallest digit count whose truncation error rho^digits is below 1e-15.
inline int min_sample_digits(const DerivedIfs& ifs) {
  return static_cast<int>(std::ceil(std::log(1e-15) / std::log(ifs.rho()))) + 1;
}

/// Index of the map selected by a uniform draw u in [0, 1).
inline std::size_t pick_map(const std::vector<double>& probabilities, double u) {
  double cum = 0.0;
  for (std::size_t j = 0; j + 1 < probabilities.size(); ++j) {
    cum += probabilities[j];
    if (u < cum) return j;
  }
  return probabilities.size() - 1;
}

/// Digit sequence J_0..J_{digits-1} of sample `index`; shared by every sampler
/// so double and high-precision samples describe the same random points.
inline std::vector<std::size_t> sample_digits(const DerivedIfs& ifs, std::uint64_t seed, std::uint64_t index,
                                              int digits) {
  const CounterRng rng(seed);
  std::vector<std::size_t> out(static_cast<std::size_t>(digits));
  for (int k = 0; k < digits; ++k) {
    out[static_cast<std::size_t>(k)] =
        pick_map(ifs.base.probabilities, rng.uniform(index, static_cast<std::uint64_t>(k)));
  }
  return out;
}

/// `count` points sum_{k<digits} rho^k a_{J_k} with i.i.d. J_k ~ p.
inline std::vector<double> sample(const DerivedIfs& ifs, std::uint64_t seed, std::size_t count, int digits) {
  detail::require(digits >= 1, ErrorCode::InvalidArgument, "digits must be positive");
  if (detail::repeated_power(ifs.rho(), digits) >= 1e-15) {
    throw Error(ErrorCode::InvalidArgument, "digits = " + std::to_string(digits) +
                                                " leaves truncation error >= 1e-15; need at least " +
                                                std::to_string(min_sample_digits(ifs)));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto js = sample_digits(ifs, seed, i, digits);
    double x = 0.0;
    for (int k = digits - 1; k >= 0; --k) x = ifs.base.translations[js[static_cast<std::size_t>(k)]] + ifs.rho() * x;
    out[i] = x;
  }
  return out;
}

}  // namespace fracdecay
