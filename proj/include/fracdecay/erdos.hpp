#pragma once

// Erdos-type covering of
//   Gamma(eps) = { x in [H1, H2] : #{k <= N : ||c0 theta^k x|| < 1/(2(1+theta))} > (1 - eps) N }
// by intervals of length 1/(c0 theta^N), with a brute-force membership oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"

namespace fracdecay {

/// h(t) = -t log t - (1 - t) log(1 - t), with h(0) = h(1) = 0.
inline double binary_entropy(double t) {
  detail::require(t >= 0.0 && t <= 1.0, ErrorCode::DomainError, "entropy argument must lie in [0, 1]");
  if (t == 0.0 || t == 1.0) return 0.0;
  return -t * std::log(t) - (1.0 - t) * std::log1p(-t);
}

/// omega(eps) = h(eps) + 2 eps log(theta + 2), the covering exponent.
inline double omega(double epsilon, double theta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::DomainError, "omega needs 0 < eps < 1");
  detail::require(theta > 1.0, ErrorCode::DomainError, "omega needs theta > 1");
  return binary_entropy(epsilon) + 2.0 * epsilon * std::log(theta + 2.0);
}

struct CoverConfig {
  double c0 = 1.0;
  double theta = 2.0;
  double epsilon = 0.25;
  int N = 1;
  Interval range{1.0, 2.0};  // [H1, H2]

  [[nodiscard]] double threshold() const noexcept { return 1.0 / (2.0 * (1.0 + theta)); }
  /// Largest admissible number of bad indices: s < eps N  <=>  s <= ceil(eps N) - 1.
  [[nodiscard]] int bad_budget() const {
    double en = epsilon * N;
    const double r = std::round(en);
    if (std::abs(en - r) <= 1e-9 * std::max(1.0, en)) en = r;
    return static_cast<int>(std::ceil(en)) - 1;
  }
  /// c0 theta^N, the reciprocal of the cover-interval length.
  [[nodiscard]] double scale() const { return c0 * std::pow(theta, N); }

  void validate() const {
    detail::require(c0 > 0.0, ErrorCode::InvalidArgument, "c0 must be positive");
    detail::require(theta > 1.0, ErrorCode::InvalidArgument, "theta must exceed 1");
    detail::require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::InvalidArgument, "epsilon must lie in (0, 1/2)");
    detail::require(N >= 1, ErrorCode::InvalidArgument, "N must be at least 1");
    detail::require(range.hi > range.lo, ErrorCode::InvalidArgument, "range needs H2 > H1");
  }
};

// --- single-step structure ----------------------------------------------------

/// Integers r' with |r' - theta r| <= (theta + 1) / 2: every possible r_{k+1}
/// given r_k. Returned as the closed range [first, last].
inline std::pair<std::int64_t, std::int64_t> child_window(double theta, std::int64_t r) {
  const double center = theta * static_cast<double>(r);
  const double half = 0.5 * (theta + 1.0);
  return {static_cast<std::int64_t>(std::ceil(center - half)), static_cast<std::int64_t>(std::floor(center + half))};
}

/// The unique r_{k+1} when both eps_k and eps_{k+1} are below the threshold:
/// the integer strictly within 1/2 of theta r_k, if any.
inline std::optional<std::int64_t> forced_child(double theta, std::int64_t r) {
  const double center = theta * static_cast<double>(r);
  const double nearest = std::nearbyint(center);
  if (std::abs(nearest - center) < 0.5) return static_cast<std::int64_t>(nearest);
  return std::nullopt;
}

/// c0 theta^k x = r_k + eps_k with r_k integer and eps_k in (-1/2, 1/2].
struct Orbit {
  std::vector<std::int64_t> r;  // r_1 .. r_N
  std::vector<double> eps;
  std::vector<bool> good;  // |eps_k| < threshold
  int good_count = 0;
};

inline Orbit orbit_digits(double x, const CoverConfig& config) {
  Orbit o;
  const double tau = config.threshold();
  double power = 1.0;
  for (int k = 1; k <= config.N; ++k) {
    power *= config.theta;
    const double y = config.c0 * power * x;
    const double r = std::ceil(y - 0.5);
    const double e = y - r;
    const bool good = std::abs(e) < tau;
    o.r.push_back(static_cast<std::int64_t>(r));
    o.eps.push_back(e);
    o.good.push_back(good);
    o.good_count += good ? 1 : 0;
  }
  return o;
}

struct Membership {
  bool is_member = false;
  int good_count = 0;
};

/// Direct evaluation of the defining condition of Gamma(eps) at x.
inline Membership brute_membership(double x, const CoverConfig& config) {
  const Orbit o = orbit_digits(x, config);
  const int bad = config.N - o.good_count;
  return {bad <= config.bad_budget(), o.good_count};
}

// --- the cover ------------------------------------------------------------------

struct CoverInterval {
  double left = 0.0;
  double right = 0.0;
  std::int64_t r_N = 0;
};

struct CoverResult {
  std::vector<CoverInterval> intervals;  // sorted by left end
  std::size_t count = 0;
  double bound = 0.0;
  double omega_bound = 0.0;  // exp(omega(eps) N)
  int bad_budget = 0;
  std::size_t nodes = 0;  // distinct search states expanded
  std::size_t max_children = 0;  // most distinct r_{k+1} values under one state
};

inline constexpr std::uint64_t kDefaultNodeBudget = 50'000'000ULL;

/// (c0 theta (H2 - H1) + 1) (theta + 2)^(2 s) sum_{j <= s + 1} C(N, j), s = bad budget.
inline double cover_bound(const CoverConfig& config) {
  const int s = config.bad_budget();
  double binom_sum = 0.0;
  double c = 1.0;
  for (int j = 0; j <= std::min(s + 1, config.N); ++j) {
    binom_sum += c;
    c = c * static_cast<double>(config.N - j) / static_cast<double>(j + 1);
  }
  return (config.c0 * config.theta * config.range.width() + 1.0) * std::pow(config.theta + 2.0, 2.0 * s) * binom_sum;
}

namespace detail {

struct CoverState {
  std::int64_t r = 0;
  int bad_used = 0;
  bool prev_bad = false;

  friend bool operator==(const CoverState&, const CoverState&) = default;
  friend auto operator<=>(const CoverState& a, const CoverState& b) {
    if (a.r != b.r) return a.r <=> b.r;
    if (a.bad_used != b.bad_used) return a.bad_used <=> b.bad_used;
    return a.prev_bad <=> b.prev_bad;
  }
};

}  // namespace detail

/// Enumerates every admissible r_1 .. r_N and returns the intervals around
/// the distinct r_N.
///
/// Search state after index k is (r_k, bad indices used, whether k was bad).
/// Index k + 1 is either declared good (forced to the integer nearest theta r_k
/// when k was good too, otherwise any integer of the child window) or bad
/// (child window, one more unit of the bad budget). States are merged level by
/// level, which visits the same leaves as a depth-first walk of the tree.
inline CoverResult build_cover(const CoverConfig& config, std::uint64_t node_budget = kDefaultNodeBudget) {
  config.validate();
  CoverResult out;
  out.bad_budget = config.bad_budget();
  const int smax = out.bad_budget;
  const double theta = config.theta;

  std::vector<detail::CoverState> frontier;
  const double a = config.c0 * theta * config.range.lo;
  const double b = config.c0 * theta * config.range.hi;
  const auto r_first = static_cast<std::int64_t>(std::ceil(a - 0.5));
  const auto r_last = static_cast<std::int64_t>(std::ceil(b - 0.5));
  for (std::int64_t r = r_first; r <= r_last; ++r) {
    frontier.push_back({r, 0, false});
    if (smax >= 1) frontier.push_back({r, 1, true});
  }
  out.nodes = frontier.size();

  std::vector<detail::CoverState> next;
  std::vector<std::int64_t> kids;
  for (int k = 1; k < config.N; ++k) {
    next.clear();
    for (const detail::CoverState& st : frontier) {
      kids.clear();
      const auto [w_lo, w_hi] = child_window(theta, st.r);
      // good successor
      if (!st.prev_bad) {
        if (auto f = forced_child(theta, st.r)) {
          next.push_back({*f, st.bad_used, false});
          kids.push_back(*f);
        }
      } else {
        for (std::int64_t r = w_lo; r <= w_hi; ++r) {
          next.push_back({r, st.bad_used, false});
          kids.push_back(r);
        }
      }
      // bad successor
      if (st.bad_used + 1 <= smax) {
        for (std::int64_t r = w_lo; r <= w_hi; ++r) {
          next.push_back({r, st.bad_used + 1, true});
          kids.push_back(r);
        }
      }
      std::sort(kids.begin(), kids.end());
      const auto distinct = static_cast<std::size_t>(std::unique(kids.begin(), kids.end()) - kids.begin());
      out.max_children = std::max(out.max_children, distinct);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    out.nodes += next.size();
    if (out.nodes > node_budget) {
      throw BudgetError("cover search exceeded the node budget of " + std::to_string(node_budget),
                        std::numeric_limits<double>::quiet_NaN());
    }
    frontier.swap(next);
  }

  std::vector<std::int64_t> leaves;
  leaves.reserve(frontier.size());
  for (const auto& st : frontier) leaves.push_back(st.r);
  std::sort(leaves.begin(), leaves.end());
  leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());

  const double scale = config.scale();
  for (std::int64_t r : leaves) {
    const double left = (static_cast<double>(r) - 0.5) / scale;
    const double right = (static_cast<double>(r) + 0.5) / scale;
    // (left, right] must meet [H1, H2]
    if (right < config.range.lo || left >= config.range.hi) continue;
    out.intervals.push_back({std::max(left, config.range.lo), std::min(right, config.range.hi), r});
  }
  out.count = out.intervals.size();
  out.bound = cover_bound(config);
  out.omega_bound = std::exp(omega(config.epsilon, theta) * config.N);
  return out;
}

struct CoverReport {
  std::vector<double> violations;  // members of Gamma(eps) outside every interval
  std::size_t grid_points = 0;
  std::size_t members = 0;
  std::size_t count = 0;
  double bound = 0.0;
  double omega_bound = 0.0;
  double ratio = 0.0;  // count / exp(omega N)
  std::size_t nodes = 0;
  std::size_t max_children = 0;

  [[nodiscard]] bool within_bound() const noexcept { return static_cast<double>(count) <= bound; }
  [[nodiscard]] bool ok() const noexcept { return violations.empty() && within_bound(); }
};

/// Checks the cover against the brute-force oracle on a uniform grid of
/// [H1, H2]. Needs at least 10 grid points per cover-interval length. With
/// `strict`, an uncovered member raises OracleViolation.
inline CoverReport verify_cover(const CoverConfig& config, std::size_t grid_points, const CoverResult& cover,
                                bool strict = true) {
  config.validate();
  const double needed = 10.0 * config.scale() * config.range.width();
  if (static_cast<double>(grid_points) < needed) {
    throw Error(ErrorCode::InvalidArgument, "verify_cover needs at least " +
                                                std::to_string(static_cast<std::uint64_t>(std::ceil(needed))) +
                                                " grid points");
  }
  CoverReport rep;
  rep.grid_points = grid_points;
  rep.count = cover.count;
  rep.bound = cover.bound;
  rep.omega_bound = cover.omega_bound;
  rep.ratio = static_cast<double>(cover.count) / cover.omega_bound;
  rep.nodes = cover.nodes;
  rep.max_children = cover.max_children;

  const auto& iv = cover.intervals;
  const double slack = 1e-9 / config.scale();
  const double h = config.range.width() / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = (i + 1 == grid_points) ? config.range.hi : config.range.lo + h * static_cast<double>(i);
    if (!brute_membership(x, config).is_member) continue;
    ++rep.members;
    // first interval whose right end reaches x
    auto it = std::lower_bound(iv.begin(), iv.end(), x - slack,
                               [](const CoverInterval& c, double v) { return c.right < v; });
    const bool covered = it != iv.end() && it->left - slack <= x;
    if (!covered) rep.violations.push_back(x);
  }
  if (strict && !rep.violations.empty()) {
    throw Error(ErrorCode::OracleViolation, std::to_string(rep.violations.size()) +
                                                " members of Gamma(eps) are uncovered; first at x = " +
                                                std::to_string(rep.violations.front()));
  }
  return rep;
}

inline CoverReport verify_cover(const CoverConfig& config, std::size_t grid_points, bool strict = true) {
  return verify_cover(config, grid_points, build_cover(config), strict);
}

}  // namespace fracdecay
