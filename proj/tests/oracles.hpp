#pragma once

// Independent reference implementations used by the tests. Nothing here
// calls into the library's numerical kernels: each oracle recomputes its
// quantity from the defining formula, in long double where it helps.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fracdecay/measure.hpp"

namespace oracle {

using fracdecay::Fraction;
using fracdecay::IfsSpec;

inline IfsSpec make(double rho, std::vector<double> a, std::vector<double> p) {
  IfsSpec s;
  s.rho = rho;
  s.translations = std::move(a);
  s.probabilities = std::move(p);
  return s;
}

inline IfsSpec cantor() {
  IfsSpec s = make(1.0 / 3.0, {0.0, 2.0 / 3.0}, {0.5, 0.5});
  s.rho_exact = Fraction{1, 3};
  s.translations_exact = {Fraction{0, 1}, Fraction{2, 3}};
  return s;
}

/// The five IFSs every cross-module suite runs on.
inline std::vector<IfsSpec> test_ifs() {
  return {cantor(),
          make(0.2, {0.0, 1.0}, {0.3, 0.7}),
          make(0.25, {0.0, 0.4, 1.0}, {0.2, 0.5, 0.3}),
          make(0.1, {-1.0, 0.0, 0.5, 2.0}, {0.1, 0.2, 0.3, 0.4}),
          make(0.4, {0.0, 1.0}, {0.5, 0.5})};
}

using cld = std::complex<long double>;

inline cld cis_ld(long double turns) {
  const long double f = turns - std::floor(turns);
  const long double two_pi = 6.283185307179586476925286766559L;
  return {std::cos(two_pi * f), std::sin(two_pi * f)};
}

/// The exact fraction when the IfsSpec carries one, else the double.
inline long double exact_ld(double x, const std::optional<Fraction>& f) {
  return f ? static_cast<long double>(f->num) / static_cast<long double>(f->den) : static_cast<long double>(x);
}

inline long double translation_ld(const IfsSpec& s, std::size_t j) {
  return exact_ld(s.translations[j], j < s.translations_exact.size() ? s.translations_exact[j] : std::nullopt);
}

inline cld phi_ld(const IfsSpec& s, long double t) {
  cld acc = 0;
  for (std::size_t j = 0; j < s.translations.size(); ++j) {
    acc += static_cast<long double>(s.probabilities[j]) * cis_ld(translation_ld(s, j) * t);
  }
  return acc;
}

/// prod_k Phi(xi rho^k) in long double, run until the factor is 1 to 1e-22.
inline std::complex<double> mu_hat(const IfsSpec& s, double xi) {
  long double amax = 0;
  for (double a : s.translations) amax = std::max(amax, std::fabs(static_cast<long double>(a)));
  cld acc = 1;
  long double t = xi;
  while (6.3L * amax * std::fabs(t) > 1e-22L) {
    acc *= phi_ld(s, t);
    t *= exact_ld(s.rho, s.rho_exact);
  }
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

/// All 2^... atoms of mu_N by explicit digit enumeration (unsorted).
inline std::vector<std::pair<long double, long double>> atoms(const IfsSpec& s, int level) {
  std::vector<std::pair<long double, long double>> out{{0.0L, 1.0L}};
  long double scale = 1.0L;
  for (int k = 0; k <= level; ++k) {
    std::vector<std::pair<long double, long double>> next;
    for (const auto& [x, w] : out) {
      for (std::size_t j = 0; j < s.translations.size(); ++j) {
        next.emplace_back(x + scale * s.translations[j], w * s.probabilities[j]);
      }
    }
    out.swap(next);
    scale *= s.rho;
  }
  return out;
}

inline double entropy(double e) { return -e * std::log(e) - (1 - e) * std::log(1 - e); }

/// Feasible-grid maximum of min{2b - 1, (1 - b) e log(delta)/log(rho)} over a
/// cell-centred n x n grid of (1/2, 1) x (0, delta).
struct BruteGamma {
  double gamma = -1.0;
  double beta = 0.0;
  double epsilon = 0.0;
};

inline BruteGamma brute_gamma(double rho, double alpha, double delta, int n = 2000) {
  const double lr = std::log(rho);
  const double c = std::log(delta) / lr;
  const double theta = 1.0 / rho;
  const double m = 1e-9;
  BruteGamma best;
  for (int i = 0; i < n; ++i) {
    const double b = 0.5 + 0.5 * (i + 0.5) / n;
    if (!(b > 0.5 + m && b < 1 - m && (2 - alpha) * b < 1 - m)) continue;
    for (int j = 0; j < n; ++j) {
      const double e = delta * (j + 0.5) / n;
      if (!(e > m && e < delta - m)) continue;
      const double om = entropy(e) + 2 * e * std::log(theta + 2);
      const double slack = om * (1 - b) / lr + 1 - (2 - alpha) * b - (1 - b) * e * c;
      if (!(slack > m)) continue;
      const double g = std::min(2 * b - 1, (1 - b) * e * c);
      if (g > best.gamma) best = {g, b, e};
    }
  }
  return best;
}

/// ||y||: distance to the nearest integer.
inline double dist_int(long double y) { return static_cast<double>(std::fabs(y - std::nearbyint(y))); }

/// A random x in [H1, H2] whose first N orbit points c0 theta^k x all lie
/// within tau of an integer, built by narrowing an x-interval one step at a
/// time (no rejection sampling). `r` holds the nearest integers r_1..r_N.
struct GoodOrbit {
  double x = 0.0;
  std::vector<std::int64_t> r;
};

inline bool good_orbit(double c0, double theta, int n, double h1, double h2, std::mt19937_64& gen, GoodOrbit& out) {
  const long double tau = 1.0L / (2.0L * (1.0L + theta));
  long double lo = h1, hi = h2, power = 1.0L;
  out.r.clear();
  for (int k = 1; k <= n; ++k) {
    power *= theta;
    const long double s = c0 * power;
    std::vector<std::int64_t> options;
    for (auto r = static_cast<std::int64_t>(std::ceil(s * lo - tau)); r <= static_cast<std::int64_t>(std::floor(s * hi + tau)); ++r) {
      // keep a margin so the final midpoint is unambiguous in double
      const long double a = std::max(lo, (r - tau) / s), b = std::min(hi, (r + tau) / s);
      if (b - a > 1e-6L / s) options.push_back(r);
    }
    if (options.empty()) return false;
    const std::int64_t r = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(gen)];
    lo = std::max(lo, (r - tau) / s);
    hi = std::min(hi, (r + tau) / s);
    out.r.push_back(r);
  }
  out.x = static_cast<double>(0.5L * (lo + hi));
  return true;
}

}  // namespace oracle
