#pragma once

// Exact / high-precision counterparts of the double sampler, used where the
// experiment needs hundreds of correct binary digits (deep Weyl sums, digit
// statistics that must not be polluted by rounding).
//
// A sample x = sum_{k<D} rho^k a_{J_k} is formed as an exact rational from the
// parameters' exact values (a written fraction such as "1/3", else the exact
// binary value of the double). Polynomial phases are then applied exactly;
// the exponential phase goes through MPFR with a comfortable guard. The
// result is stored as a fixed-point number floor(phi(x) 2^bits) / 2^bits.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/phase.hpp"

namespace fracdecay {

/// num / 2^bits, with the promise that it is within 2^-valid_bits of the
/// real number it stands for.
struct FixedReal {
  mpz_class num;
  unsigned bits = 0;
  unsigned valid_bits = 0;

  /// The exact binary value of a double (valid to all `bits`).
  static FixedReal from_double(double x, unsigned bits = 1100) {
    detail::require(std::isfinite(x), ErrorCode::InvalidArgument, "non-finite value");
    int e = 0;
    const double m = std::frexp(x, &e);  // x = m 2^e, |m| in [1/2, 1)
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));  // x = mant 2^(e-53)
    const int shift = e - 53 + static_cast<int>(bits);
    detail::require(shift >= 0, ErrorCode::PrecisionExceeded,
                    "double needs more than " + std::to_string(bits) + " fractional bits");
    FixedReal r;
    r.num = mpz_class(static_cast<long>(mant));
    mpz_mul_2exp(r.num.get_mpz_t(), r.num.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    r.bits = bits;
    r.valid_bits = bits;
    return r;
  }

  static FixedReal from_rational(const mpq_class& q, unsigned bits) {
    FixedReal r;
    mpz_class scaled = q.get_num();
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
    mpz_fdiv_q(r.num.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
    r.bits = bits;
    r.valid_bits = bits;
    return r;
  }

  /// Fractional part as an integer in [0, 2^bits).
  [[nodiscard]] mpz_class frac_num() const {
    mpz_class f;
    mpz_fdiv_r_2exp(f.get_mpz_t(), num.get_mpz_t(), bits);
    return f;
  }

  [[nodiscard]] double to_double() const {
    mpq_class q(num);
    mpz_class den(1);
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), bits);
    q /= den;
    return q.get_d();
  }
};

/// Top 53 bits of r / 2^bits for r in [0, 2^bits), as a double in [0, 1).
inline double fixed_turns(const mpz_class& r, unsigned bits) {
  if (bits <= 60) return std::ldexp(r.get_d(), -static_cast<int>(bits));
  mpz_class top;
  mpz_fdiv_q_2exp(top.get_mpz_t(), r.get_mpz_t(), bits - 60);
  return std::ldexp(top.get_d(), -60);
}

namespace detail {

inline mpq_class exact_param(double value, const std::optional<Fraction>& exact) {
  if (exact) {
    mpq_class q(mpz_class(static_cast<long>(exact->num)), mpz_class(static_cast<long>(exact->den)));
    q.canonicalize();
    return q;
  }
  return mpq_class(value);  // exact binary value
}

}  // namespace detail

/// Exact rational parameters of an IFS.
struct ExactIfs {
  mpq_class rho;
  std::vector<mpq_class> translations;

  static ExactIfs from(const DerivedIfs& ifs) {
    ExactIfs e;
    e.rho = detail::exact_param(ifs.base.rho, ifs.base.rho_exact);
    for (std::size_t j = 0; j < ifs.m(); ++j) {
      const std::optional<Fraction> f =
          j < ifs.base.translations_exact.size() ? ifs.base.translations_exact[j] : std::nullopt;
      e.translations.push_back(detail::exact_param(ifs.base.translations[j], f));
    }
    return e;
  }
};

/// Generates exact samples phi(x) for x ~ mu_rho, in fixed point.
class PreciseSampler {
 public:
  PreciseSampler(const DerivedIfs& ifs, const PhaseSpec& phase, unsigned bits)
      : ifs_(ifs), phase_(phase), exact_(ExactIfs::from(ifs)), bits_(bits) {
    detail::require(bits >= 64, ErrorCode::InvalidArgument, "need at least 64 bits");
    // sup |phi'| on the hull bounds the effect of dropping digits beyond D.
    double lip = 1.0;
    if (phase.kind() == PhaseKind::Exponential) {
      lip = std::max({1.0, std::abs(phase.d1(ifs.hull.lo)), std::abs(phase.d1(ifs.hull.hi))});
    } else {
      lip = std::max(1.0, phase.poly().derivative().abs_bound(ifs.hull));
    }
    const double need = static_cast<double>(bits) + 8.0 + std::log2(lip * std::max(ifs.hull.width(), 1e-300));
    digits_ = std::max(1, static_cast<int>(std::ceil(need / -std::log2(ifs.rho()))) + 1);
    // common denominator V of the translations; rho = P / Q
    mpz_class v(1);
    for (const auto& a : exact_.translations) mpz_lcm(v.get_mpz_t(), v.get_mpz_t(), a.get_den().get_mpz_t());
    v_ = v;
    for (const auto& a : exact_.translations) scaled_a_.push_back(mpz_class(a.get_num() * (v / a.get_den())));
    p_ = exact_.rho.get_num();
    q_ = exact_.rho.get_den();
    mpz_pow_ui(q_pow_.get_mpz_t(), q_.get_mpz_t(), static_cast<unsigned long>(digits_ - 1));
    if (phase.kind() != PhaseKind::Exponential) {
      for (double c : phase.poly().coefficients) coeffs_.emplace_back(c);
    }
  }

  [[nodiscard]] int digits() const noexcept { return digits_; }
  [[nodiscard]] unsigned bits() const noexcept { return bits_; }

  /// The exact truncated sample x_D = sum_{k<D} rho^k a_{J_k}.
  [[nodiscard]] mpq_class point(std::uint64_t seed, std::uint64_t index) const {
    const auto js = sample_digits(ifs_, seed, index, digits_);
    // Horner: n_{D-1} = A_{J}, n_k = A_{J_k} Q^{D-1-k} + P n_{k+1}; x = n_0 / (V Q^{D-1}).
    mpz_class n = scaled_a_[js.back()];
    mpz_class qk(1);
    for (int k = digits_ - 2; k >= 0; --k) {
      qk *= q_;
      n = scaled_a_[js[static_cast<std::size_t>(k)]] * qk + p_ * n;
    }
    mpq_class x(n, v_ * q_pow_);
    x.canonicalize();
    return x;
  }

  /// phi(x) for sample `index`, valid to bits - 1 binary places.
  [[nodiscard]] FixedReal operator()(std::uint64_t seed, std::uint64_t index) const {
    const mpq_class x = point(seed, index);
    FixedReal r;
    if (phase_.kind() == PhaseKind::Exponential) {
      r = exp_fixed(x);
    } else {
      mpq_class acc(0);
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      r = FixedReal::from_rational(acc, bits_);
    }
    r.valid_bits = bits_ - 1;
    return r;
  }

 private:
  FixedReal exp_fixed(const mpq_class& x) const {
    const mpfr_prec_t prec = static_cast<mpfr_prec_t>(bits_) + 128;
    mpfr_t t, s;
    mpfr_init2(t, prec);
    mpfr_init2(s, prec);
    mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDN);
    mpfr_set_d(s, phase_.scale(), MPFR_RNDN);
    mpfr_mul(t, t, s, MPFR_RNDN);
    mpfr_exp(t, t, MPFR_RNDN);
    mpfr_mul_2ui(t, t, bits_, MPFR_RNDN);
    FixedReal r;
    mpfr_get_z(r.num.get_mpz_t(), t, MPFR_RNDD);
    r.bits = bits_;
    mpfr_clear(t);
    mpfr_clear(s);
    return r;
  }

  DerivedIfs ifs_;
  PhaseSpec phase_;
  ExactIfs exact_;
  unsigned bits_;
  int digits_ = 0;
  mpz_class v_, p_, q_, q_pow_;
  std::vector<mpz_class> scaled_a_;
  std::vector<mpq_class> coeffs_;
};

}  // namespace fracdecay
