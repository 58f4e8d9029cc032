#pragma once

// Phase functions phi (C^2, phi'' > 0) and weights g (C^1) drawn from a small
// catalog with exact derivatives, plus the hull constants H0, M, H1, H2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"

namespace fracdecay {

/// Dense polynomial sum_i c[i] t^i.
struct Polynomial {
  std::vector<double> coefficients;

  template <class T>
  [[nodiscard]] T operator()(const T& t) const {
    T acc = T(0);
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * t + T(*it);
    return acc;
  }

  [[nodiscard]] Polynomial derivative() const {
    Polynomial d;
    for (std::size_t i = 1; i < coefficients.size(); ++i) {
      d.coefficients.push_back(static_cast<double>(i) * coefficients[i]);
    }
    return d;
  }

  /// Degree ignoring trailing zero coefficients; -1 for the zero polynomial.
  [[nodiscard]] int degree() const {
    for (std::size_t i = coefficients.size(); i > 0; --i) {
      if (coefficients[i - 1] != 0.0) return static_cast<int>(i) - 1;
    }
    return -1;
  }

  /// Upper bound on sup |p| over the interval: sum |c_i| R^i, R = max(|lo|, |hi|).
  [[nodiscard]] double abs_bound(const Interval& iv) const {
    const double r = std::max(std::abs(iv.lo), std::abs(iv.hi));
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }
};

enum class PhaseKind { Quadratic, Exponential, Polynomial, Identity };

/// A phase phi from the built-in catalog.
///
///  - quadratic:   c2 t^2 + c1 t + c0
///  - exponential: exp(scale * t)
///  - polynomial:  sum_i c_i t^i
///  - identity:    t (linear; admitted only in plumbing mode)
class PhaseSpec {
 public:
  static PhaseSpec quadratic(double c2, double c1 = 0.0, double c0 = 0.0) {
    return PhaseSpec(PhaseKind::Quadratic, Polynomial{{c0, c1, c2}}, 0.0);
  }
  static PhaseSpec exponential(double scale = 1.0) { return PhaseSpec(PhaseKind::Exponential, {}, scale); }
  static PhaseSpec polynomial(std::vector<double> coefficients) {
    return PhaseSpec(PhaseKind::Polynomial, Polynomial{std::move(coefficients)}, 0.0);
  }
  static PhaseSpec identity() { return PhaseSpec(PhaseKind::Identity, Polynomial{{0.0, 1.0}}, 0.0); }

  [[nodiscard]] PhaseKind kind() const noexcept { return kind_; }
  [[nodiscard]] bool linear() const noexcept { return kind_ == PhaseKind::Identity; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] const Polynomial& poly() const noexcept { return poly_; }

  template <class T>
  [[nodiscard]] T value(const T& t) const {
    if (kind_ == PhaseKind::Exponential) {
      using std::exp;
      return exp(T(scale_) * t);
    }
    return poly_(t);
  }
  [[nodiscard]] double d1(double t) const {
    if (kind_ == PhaseKind::Exponential) return scale_ * std::exp(scale_ * t);
    return d1_(t);
  }
  [[nodiscard]] double d2(double t) const {
    if (kind_ == PhaseKind::Exponential) return scale_ * scale_ * std::exp(scale_ * t);
    return d2_(t);
  }
  [[nodiscard]] double d3(double t) const {
    if (kind_ == PhaseKind::Exponential) return scale_ * scale_ * scale_ * std::exp(scale_ * t);
    return d3_(t);
  }

 private:
  PhaseSpec(PhaseKind kind, Polynomial poly, double scale)
      : kind_(kind), poly_(std::move(poly)), scale_(scale) {
    d1_ = poly_.derivative();
    d2_ = d1_.derivative();
    d3_ = d2_.derivative();
  }

  PhaseKind kind_;
  Polynomial poly_;
  double scale_;
  Polynomial d1_, d2_, d3_;
};

enum class WeightKind { Constant, Polynomial };

class WeightSpec {
 public:
  static WeightSpec constant(double c = 1.0) { return WeightSpec(WeightKind::Constant, Polynomial{{c}}); }
  static WeightSpec polynomial(std::vector<double> coefficients) {
    return WeightSpec(WeightKind::Polynomial, Polynomial{std::move(coefficients)});
  }

  [[nodiscard]] WeightKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Polynomial& poly() const noexcept { return poly_; }
  [[nodiscard]] double value(double t) const { return poly_(t); }
  [[nodiscard]] double d1(double t) const { return d1_(t); }
  [[nodiscard]] double d2(double t) const { return d2_(t); }
  [[nodiscard]] bool is_constant() const { return poly_.degree() <= 0; }

 private:
  WeightSpec(WeightKind kind, Polynomial poly) : kind_(kind), poly_(std::move(poly)) {
    d1_ = poly_.derivative();
    d2_ = d1_.derivative();
  }

  WeightKind kind_;
  Polynomial poly_;
  Polynomial d1_, d2_;
};

inline constexpr int kHullGridPoints = 4096;

struct ConvexityCertificate {
  bool convex = false;
  double min_value = 0.0;  // smallest phi'' seen (exact for closed forms)
  double location = 0.0;  // where it is attained
  double lower_bound = 0.0;  // certified lower bound on phi'' over the interval
};

struct GridExtremum {
  double value = 0.0;  // extremum over the grid
  double location = 0.0;
  double bound = 0.0;  // value inflated by the Lipschitz margin L h / 2
};

namespace detail {

/// Max of f over a uniform grid with kHullGridPoints points (endpoints
/// included), plus the margin lipschitz * h / 2 that makes it a sound upper
/// bound for the continuous supremum.
template <class F>
GridExtremum grid_max(const Interval& iv, F&& f, double lipschitz) {
  const double h = iv.width() / (kHullGridPoints - 1);
  GridExtremum best{-INFINITY, iv.lo, 0.0};
  for (int i = 0; i < kHullGridPoints; ++i) {
    const double t = (i == kHullGridPoints - 1) ? iv.hi : iv.lo + h * i;
    const double v = f(t);
    if (v > best.value) {
      best.value = v;
      best.location = t;
    }
  }
  best.bound = best.value + 0.5 * lipschitz * h;
  return best;
}

}  // namespace detail

/// Certifies phi'' > 0 on the interval or reports the smallest phi'' found.
///
/// Throws LinearPhase for the identity kind unless `plumbing` is set, in which
/// case a non-convex certificate with min 0 is returned.
inline ConvexityCertificate check_convexity(const PhaseSpec& phase, const Interval& iv, bool plumbing = false) {
  detail::require(iv.hi > iv.lo, ErrorCode::InvalidArgument, "convexity interval must be non-degenerate");
  ConvexityCertificate c;
  switch (phase.kind()) {
    case PhaseKind::Identity:
      if (!plumbing) throw Error(ErrorCode::LinearPhase, "identity phase has phi'' == 0");
      c = {false, 0.0, iv.lo, 0.0};
      return c;
    case PhaseKind::Exponential: {
      // s^2 e^{s t} is monotone in t.
      const double at = phase.scale() >= 0.0 ? iv.lo : iv.hi;
      const double v = phase.d2(at);
      return {v > 0.0, v, at, v};
    }
    case PhaseKind::Quadratic:
    case PhaseKind::Polynomial: {
      const double lo = phase.d2(iv.lo);
      const double hi = phase.d2(iv.hi);
      if (phase.poly().degree() <= 3) {
        // phi'' is affine: the minimum sits at an endpoint.
        const bool left = lo <= hi;
        const double v = left ? lo : hi;
        return {v > 0.0, v, left ? iv.lo : iv.hi, v};
      }
      const Polynomial d3 = phase.poly().derivative().derivative().derivative();
      auto neg = [&](double t) { return -phase.d2(t); };
      const GridExtremum g = detail::grid_max(iv, neg, d3.abs_bound(iv));
      c.min_value = -g.value;
      c.location = g.location;
      c.lower_bound = -g.bound;
      c.convex = c.lower_bound > 0.0;
      return c;
    }
  }
  return c;
}

/// Constants of the linearization argument over the hull K and its double 2K.
struct HullConstants {
  double H0 = 0.0;  // sup_K |phi''|
  double M = 0.0;  // sup_2K (|g| + |g'|)
  double H1 = 0.0;  // min_K (a_l - a_s) phi'
  double H2 = 0.0;  // max_K (a_l - a_s) phi'
  double sup_phi1 = 0.0;  // sup_K |phi'|
};

/// Computes the hull constants. Closed forms are used for the quadratic and
/// exponential kinds and for affine pieces; otherwise 4096-point grid extrema
/// are inflated by a Lipschitz margin from a bound on the next derivative.
///
/// Requires phi'' > 0 on the hull (NonConvexPhase otherwise); the identity
/// kind is admitted only with `plumbing`.
inline HullConstants hull_constants(const PhaseSpec& phase, const WeightSpec& weight, const DerivedIfs& ifs,
                                    bool plumbing = false) {
  const Interval& k = ifs.hull;
  const Interval k2 = k.dilated(2.0);
  const double gap = ifs.a_l - ifs.a_s;
  HullConstants hc;

  const ConvexityCertificate cert = check_convexity(phase, k, plumbing);
  if (!phase.linear() && !cert.convex) {
    throw Error(ErrorCode::NonConvexPhase,
                "phi'' is not certified positive on the hull (min " + std::to_string(cert.min_value) + " at t = " +
                    std::to_string(cert.location) + ")");
  }

  // phi' is monotone on K (strictly increasing when convex), so its extrema
  // sit at the hull endpoints.
  const double p_lo = phase.d1(k.lo);
  const double p_hi = phase.d1(k.hi);
  hc.H1 = gap * std::min(p_lo, p_hi);
  hc.H2 = gap * std::max(p_lo, p_hi);
  hc.sup_phi1 = std::max(std::abs(p_lo), std::abs(p_hi));

  switch (phase.kind()) {
    case PhaseKind::Identity: hc.H0 = 0.0; break;
    case PhaseKind::Quadratic: hc.H0 = std::abs(phase.d2(0.0)); break;
    case PhaseKind::Exponential: hc.H0 = std::max(phase.d2(k.lo), phase.d2(k.hi)); break;
    case PhaseKind::Polynomial:
      if (phase.poly().degree() <= 3) {
        hc.H0 = std::max(std::abs(phase.d2(k.lo)), std::abs(phase.d2(k.hi)));
      } else {
        const Polynomial d3 = phase.poly().derivative().derivative().derivative();
        hc.H0 = detail::grid_max(k, [&](double t) { return std::abs(phase.d2(t)); }, d3.abs_bound(k)).bound;
      }
      break;
  }

  if (weight.poly().degree() <= 1) {
    // |g| + |g'| is convex for affine g.
    hc.M = std::max(std::abs(weight.value(k2.lo)), std::abs(weight.value(k2.hi))) + std::abs(weight.d1(k2.lo));
  } else {
    const Polynomial g1 = weight.poly().derivative();
    const double lipschitz = g1.abs_bound(k2) + g1.derivative().abs_bound(k2);
    hc.M = detail::grid_max(k2, [&](double t) { return std::abs(weight.value(t)) + std::abs(weight.d1(t)); },
                            lipschitz)
               .bound;
  }
  return hc;
}

/// Raw grid extrema of the same quantities (no closed forms, no margin);
/// used to cross-check the closed forms.
inline HullConstants hull_constants_grid(const PhaseSpec& phase, const WeightSpec& weight, const DerivedIfs& ifs) {
  const Interval& k = ifs.hull;
  const Interval k2 = k.dilated(2.0);
  const double gap = ifs.a_l - ifs.a_s;
  HullConstants hc;
  hc.H0 = detail::grid_max(k, [&](double t) { return std::abs(phase.d2(t)); }, 0.0).value;
  hc.M = detail::grid_max(k2, [&](double t) { return std::abs(weight.value(t)) + std::abs(weight.d1(t)); }, 0.0)
             .value;
  hc.H1 = -detail::grid_max(k, [&](double t) { return -gap * phase.d1(t); }, 0.0).value;
  hc.H2 = detail::grid_max(k, [&](double t) { return gap * phase.d1(t); }, 0.0).value;
  hc.sup_phi1 = detail::grid_max(k, [&](double t) { return std::abs(phase.d1(t)); }, 0.0).value;
  return hc;
}

}  // namespace fracdecay
