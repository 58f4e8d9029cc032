#pragma once

// Equidistribution experiments for phi(x), x ~ mu_rho.
//
// The Davenport-Erdos-LeVeque series
//   sum_N N^-3 sum_{m,n <= N} T(h (s_n - s_m)),  T(xi) = int e(xi phi) dmu,
// converging implies {s_n phi(x)} is equidistributed for a.e. x. Its inner
// double sum equals int |sum_n e(h s_n phi)|^2 dmu, so it is real and >= 0;
// the code checks the imaginary residue rather than assuming it away.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/fourier.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/parallel.hpp"
#include "fracdecay/phase.hpp"
#include "fracdecay/precise.hpp"

namespace fracdecay {

enum class SequenceKind { Identity, Arithmetic, Geometric, Explicit };

/// A strictly increasing sequence of positive integers s_1, s_2, ...
class SequenceSpec {
 public:
  static SequenceSpec identity() { return SequenceSpec(SequenceKind::Identity, 1, 1, 0, {}); }
  /// s_n = a + (n - 1) d
  static SequenceSpec arithmetic(std::int64_t a, std::int64_t d) {
    detail::require(a >= 1 && d >= 1, ErrorCode::InvalidArgument, "arithmetic sequence needs a >= 1, d >= 1");
    return SequenceSpec(SequenceKind::Arithmetic, a, d, 0, {});
  }
  /// s_n = b^n
  static SequenceSpec geometric(std::int64_t b) {
    detail::require(b >= 2, ErrorCode::InvalidArgument, "geometric sequence needs b >= 2");
    return SequenceSpec(SequenceKind::Geometric, 0, 0, b, {});
  }
  static SequenceSpec explicit_list(std::vector<std::int64_t> values) {
    detail::require(!values.empty() && values.front() >= 1, ErrorCode::InvalidArgument,
                    "explicit sequence must be non-empty and positive");
    for (std::size_t i = 1; i < values.size(); ++i) {
      detail::require(values[i] > values[i - 1], ErrorCode::InvalidArgument,
                      "explicit sequence must be strictly increasing");
    }
    return SequenceSpec(SequenceKind::Explicit, 0, 0, 0, std::move(values));
  }

  [[nodiscard]] SequenceKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::int64_t base() const noexcept { return b_; }
  [[nodiscard]] std::int64_t start() const noexcept { return a_; }
  [[nodiscard]] std::int64_t step() const noexcept { return d_; }
  [[nodiscard]] const std::vector<std::int64_t>& values() const noexcept { return values_; }

  /// Largest usable n (explicit lists are finite).
  [[nodiscard]] std::size_t max_length() const noexcept {
    return kind_ == SequenceKind::Explicit ? values_.size() : static_cast<std::size_t>(-1);
  }

  /// s_n as an arbitrary-precision integer, n >= 1.
  [[nodiscard]] mpz_class term(std::size_t n) const {
    detail::require(n >= 1 && n <= max_length(), ErrorCode::InvalidArgument, "sequence index out of range");
    switch (kind_) {
      case SequenceKind::Identity: return mpz_class(static_cast<unsigned long>(n));
      case SequenceKind::Arithmetic:
        return mpz_class(static_cast<long>(a_)) + mpz_class(static_cast<long>(d_)) * static_cast<unsigned long>(n - 1);
      case SequenceKind::Geometric: {
        mpz_class r;
        mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(b_), static_cast<unsigned long>(n));
        return r;
      }
      case SequenceKind::Explicit: return mpz_class(static_cast<long>(values_[n - 1]));
    }
    return {};
  }

  /// s_n as a double (exact while below 2^53).
  [[nodiscard]] double term_double(std::size_t n) const { return term(n).get_d(); }

 private:
  SequenceSpec(SequenceKind kind, std::int64_t a, std::int64_t d, std::int64_t b, std::vector<std::int64_t> values)
      : kind_(kind), a_(a), d_(d), b_(b), values_(std::move(values)) {}

  SequenceKind kind_;
  std::int64_t a_, d_, b_;
  std::vector<std::int64_t> values_;
};

// --- DEL partial sums -----------------------------------------------------

struct DelPoint {
  std::size_t n = 0;
  double inner = 0.0;  // sum_{m,n <= N} T(h (s_n - s_m)), real part
  double increment = 0.0;  // inner / N^3
  double partial = 0.0;  // sum_{K <= N} increment_K
  double imag_residue = 0.0;  // |Im inner| before it was discarded
};

inline constexpr double kImaginaryResidueTol = 1e-9;

using TransformEval = std::function<Complex(double)>;

/// Partial sums of the DEL series for N = 1..n_max.
///
/// inner(N) = inner(N-1) + T(0) + sum_{m<N} [T(h d_m) + T(-h d_m)], d_m = s_N - s_m,
/// with T cached per difference, so each step costs O(N) lookups and only new
/// differences reach the evaluator.
inline std::vector<DelPoint> del_partial_sums(const TransformEval& transform, std::int64_t h,
                                              const SequenceSpec& seq, std::size_t n_max) {
  detail::require(h != 0, ErrorCode::InvalidArgument, "h must be nonzero");
  detail::require(n_max >= 1 && n_max <= seq.max_length(), ErrorCode::InvalidArgument,
                  "n_max outside the sequence length");
  std::vector<double> s(n_max + 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const mpz_class t = seq.term(n);
    detail::require(mpz_sizeinbase(t.get_mpz_t(), 2) <= 53, ErrorCode::PrecisionExceeded,
                    "sequence term exceeds 2^53; frequencies h (s_n - s_m) are no longer exact doubles");
    s[n] = t.get_d();
  }
  std::map<double, std::pair<Complex, Complex>> cache;  // d -> (T(h d), T(-h d))
  const double hd = static_cast<double>(h);
  const Complex t0 = transform(0.0);
  std::vector<DelPoint> out;
  out.reserve(n_max);
  Complex inner{0.0, 0.0};
  double partial = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    Complex step = t0;
    for (std::size_t m = 1; m < n; ++m) {
      const double d = s[n] - s[m];
      auto it = cache.find(d);
      if (it == cache.end()) it = cache.emplace(d, std::make_pair(transform(hd * d), transform(-hd * d))).first;
      step += it->second.first + it->second.second;
    }
    inner += step;
    const double residue = std::abs(inner.imag());
    if (!(residue < kImaginaryResidueTol)) {
      throw Error(ErrorCode::ImaginaryResidue,
                  "imaginary residue " + std::to_string(residue) + " at N = " + std::to_string(n));
    }
    DelPoint p;
    p.n = n;
    p.inner = inner.real();
    const double nd = static_cast<double>(n);
    p.increment = p.inner / (nd * nd * nd);
    partial += p.increment;
    p.partial = partial;
    p.imag_residue = residue;
    out.push_back(p);
  }
  return out;
}

/// The same partials by direct O(N^2) recomputation per step (oracle).
inline std::vector<DelPoint> del_partial_sums_naive(const TransformEval& transform, std::int64_t h,
                                                    const SequenceSpec& seq, std::size_t n_max) {
  std::vector<DelPoint> out;
  double partial = 0.0;
  const double hd = static_cast<double>(h);
  for (std::size_t n = 1; n <= n_max; ++n) {
    Complex inner{0.0, 0.0};
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = 1; b <= n; ++b) inner += transform(hd * (seq.term_double(a) - seq.term_double(b)));
    }
    DelPoint p;
    p.n = n;
    p.inner = inner.real();
    p.imag_residue = std::abs(inner.imag());
    const double nd = static_cast<double>(n);
    p.increment = p.inner / (nd * nd * nd);
    partial += p.increment;
    p.partial = partial;
    out.push_back(p);
  }
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(increment) against log(N) over N in
/// [n_max / 10, n_max]. Increments are >= 0 mathematically; non-positive ones
/// (rounding at the noise floor) are skipped.
inline SlopeFit increment_log_slope(const std::vector<DelPoint>& points) {
  detail::require(!points.empty(), ErrorCode::InvalidArgument, "no partial sums");
  const std::size_t n_max = points.back().n;
  const std::size_t lo = std::max<std::size_t>(2, n_max / 10);
  std::vector<double> xs, ys;
  for (const DelPoint& p : points) {
    if (p.n < lo || !(p.increment > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(p.increment));
  }
  detail::require(xs.size() >= 2, ErrorCode::InvalidArgument, "need at least two checkpoints for a slope");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = xs.size();
  return f;
}

/// Slopes at or above -1 (within this margin) read as divergence: the
/// increments are no smaller than the harmonic series'.
inline constexpr double kDivergenceSlopeMargin = 1e-9;
inline bool slope_diverges(double slope) { return slope >= -1.0 - kDivergenceSlopeMargin; }

// --- digits ---------------------------------------------------------------

/// counts[position][digit] over the digit_count positions after `offset`.
struct DigitTable {
  int base = 2;
  int digit_count = 0;
  int offset = 0;  // digits skipped before counting
  std::size_t values = 0;
  std::vector<std::vector<std::uint64_t>> counts;

  /// Aggregate frequency of each digit over all positions.
  [[nodiscard]] std::vector<double> frequencies() const {
    std::vector<double> f(static_cast<std::size_t>(base), 0.0);
    double total = 0.0;
    for (const auto& row : counts) {
      for (int d = 0; d < base; ++d) {
        f[static_cast<std::size_t>(d)] += static_cast<double>(row[static_cast<std::size_t>(d)]);
        total += static_cast<double>(row[static_cast<std::size_t>(d)]);
      }
    }
    if (total > 0.0) {
      for (double& x : f) x /= total;
    }
    return f;
  }
  [[nodiscard]] double frequency_at(int position, int digit) const {
    const auto& row = counts[static_cast<std::size_t>(position)];
    return values ? static_cast<double>(row[static_cast<std::size_t>(digit)]) / static_cast<double>(values) : 0.0;
  }
};

/// Doubles carry about this many trustworthy fractional bits.
inline constexpr double kDoubleDigitBits = 50.0;

inline DigitTable make_digit_table(int base, int digit_count, int offset) {
  detail::require(base >= 2, ErrorCode::InvalidArgument, "base must be >= 2");
  detail::require(digit_count >= 1 && offset >= 0, ErrorCode::InvalidArgument, "need digit_count >= 1, offset >= 0");
  DigitTable t;
  t.base = base;
  t.digit_count = digit_count;
  t.offset = offset;
  t.counts.assign(static_cast<std::size_t>(digit_count), std::vector<std::uint64_t>(static_cast<std::size_t>(base), 0));
  return t;
}

/// First digit_count base-b digits of frac(v), by repeated multiply-and-floor.
inline DigitTable digit_frequencies(const std::vector<double>& values, int base, int digit_count) {
  DigitTable t = make_digit_table(base, digit_count, 0);
  if (static_cast<double>(digit_count) * std::log2(static_cast<double>(base)) > kDoubleDigitBits) {
    throw Error(ErrorCode::PrecisionExceeded, std::to_string(digit_count) + " base-" + std::to_string(base) +
                                                  " digits exceed the " + std::to_string(int(kDoubleDigitBits)) +
                                                  " bits a double carries");
  }
  for (double v : values) {
    double f = v - std::floor(v);
    for (int k = 0; k < digit_count; ++k) {
      f *= base;
      const double d = std::floor(f);
      f -= d;
      const int di = std::clamp(static_cast<int>(d), 0, base - 1);
      ++t.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(di)];
    }
  }
  t.values = values.size();
  return t;
}

/// Exact digit extraction from fixed-point values; digits offset+1 ..
/// offset+digit_count must lie within each value's valid bits (with a guard).
inline DigitTable digit_frequencies(const std::vector<FixedReal>& values, int base, int digit_count, int offset = 0) {
  DigitTable t = make_digit_table(base, digit_count, offset);
  const double need = static_cast<double>(digit_count + offset) * std::log2(static_cast<double>(base)) + 8.0;
  for (const FixedReal& v : values) {
    if (need > static_cast<double>(v.valid_bits)) {
      throw Error(ErrorCode::PrecisionExceeded, "digits need " + std::to_string(need) + " bits, value has " +
                                                    std::to_string(v.valid_bits));
    }
    mpz_class r = v.frac_num();
    mpz_class d;
    for (int k = 0; k < offset + digit_count; ++k) {
      r *= base;
      mpz_fdiv_q_2exp(d.get_mpz_t(), r.get_mpz_t(), v.bits);
      mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), v.bits);
      if (k >= offset) ++t.counts[static_cast<std::size_t>(k - offset)][d.get_ui()];
    }
  }
  t.values = values.size();
  return t;
}

// --- Weyl sums ------------------------------------------------------------

struct WeylPoint {
  std::size_t n = 0;
  double magnitude = 0.0;  // |N^-1 sum_{n <= N} e(h s_n y)|, averaged over values
};

namespace detail {

/// Running sums sum_{n<=N} e(h s_n y) for one fixed-point y, exact phase
/// reduction h s_n y mod 1 on the integer numerator.
inline void weyl_accumulate(const FixedReal& y, const SequenceSpec& seq, std::int64_t h, std::size_t n_max,
                            std::vector<double>& magnitude_sum) {
  const unsigned bits = y.bits;
  const mpz_class frac = y.frac_num();
  mpz_class r;
  Complex acc{0.0, 0.0};
  const bool geometric = seq.kind() == SequenceKind::Geometric;
  mpz_class running;  // for geometric: h b^n y mod 2^bits, updated by one multiply
  if (geometric) {
    running = frac * static_cast<long>(h);
    mpz_fdiv_r_2exp(running.get_mpz_t(), running.get_mpz_t(), bits);
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (geometric) {
      running *= static_cast<long>(seq.base());
      mpz_fdiv_r_2exp(running.get_mpz_t(), running.get_mpz_t(), bits);
      r = running;
    } else {
      r = seq.term(n) * frac * static_cast<long>(h);
      mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), bits);
    }
    acc += cis_turns(fixed_turns(r, bits));
    magnitude_sum[n - 1] += std::abs(acc) / static_cast<double>(n);
  }
}

inline void require_weyl_precision(const FixedReal& y, const SequenceSpec& seq, std::int64_t h, std::size_t n_max) {
  // h s_N y mod 1 must still carry ~20 correct bits.
  mpz_class top = seq.term(n_max) * static_cast<long>(h >= 0 ? h : -h);
  const double need = static_cast<double>(mpz_sizeinbase(top.get_mpz_t(), 2)) + 20.0;
  if (need > static_cast<double>(y.valid_bits)) {
    throw Error(ErrorCode::PrecisionExceeded, "Weyl sum to N = " + std::to_string(n_max) + " needs " +
                                                  std::to_string(static_cast<long>(need)) + " valid bits, value has " +
                                                  std::to_string(y.valid_bits));
  }
}

}  // namespace detail

/// Averaged Weyl magnitudes over fixed-point values, N = 1..n_max.
inline std::vector<WeylPoint> weyl_sums(const std::vector<FixedReal>& values, const SequenceSpec& seq,
                                        std::int64_t h, std::size_t n_max, unsigned threads = 1) {
  detail::require(h != 0, ErrorCode::InvalidArgument, "h must be nonzero");
  detail::require(n_max >= 1 && n_max <= seq.max_length(), ErrorCode::InvalidArgument,
                  "n_max outside the sequence length");
  detail::require(!values.empty(), ErrorCode::InvalidArgument, "no values");
  for (const FixedReal& y : values) detail::require_weyl_precision(y, seq, h, n_max);
  // fixed chunking: the summation order does not depend on the thread count
  constexpr std::size_t kChunks = 64;
  const std::size_t chunks = std::min(kChunks, values.size());
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(n_max, 0.0));
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = values.size() * c / chunks;
    const std::size_t hi = values.size() * (c + 1) / chunks;
    for (std::size_t i = lo; i < hi; ++i) detail::weyl_accumulate(values[i], seq, h, n_max, partial[c]);
  });
  std::vector<WeylPoint> out(n_max);
  for (std::size_t n = 0; n < n_max; ++n) {
    double s = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) s += partial[c][n];
    out[n] = {n + 1, s / static_cast<double>(values.size())};
  }
  return out;
}

/// Weyl magnitudes of double values, each taken as its exact binary rational.
inline std::vector<WeylPoint> weyl_sums(const std::vector<double>& values, const SequenceSpec& seq, std::int64_t h,
                                        std::size_t n_max) {
  std::vector<FixedReal> fixed;
  fixed.reserve(values.size());
  for (double v : values) fixed.push_back(FixedReal::from_double(v, 1100));
  for (FixedReal& f : fixed) f.valid_bits = std::numeric_limits<unsigned>::max();
  return weyl_sums(fixed, seq, h, n_max);
}

// --- report ---------------------------------------------------------------

struct NormalityConfig {
  int base = 2;
  std::uint64_t seed = 1;
  std::size_t sample_count = 10'000;
  int digit_count = 30;
  int digit_offset = 0;
  SequenceSpec sequence = SequenceSpec::identity();
  std::vector<std::int64_t> h_list{1};
  std::size_t weyl_samples = 1000;  // first samples used for Weyl sums
  std::size_t weyl_n_max = 1000;
  std::size_t del_n_max = 0;  // 0 disables the DEL partial sums
  double del_tol = 1e-5;  // tolerance of the transform evaluations
  unsigned threads = 1;
};

struct WeylSeries {
  std::int64_t h = 0;
  std::vector<WeylPoint> points;
};

struct DelSeries {
  std::int64_t h = 0;
  std::vector<DelPoint> points;
  SlopeFit slope;
  bool diverges = false;
};

struct NormalityReport {
  int base = 2;
  std::size_t sample_count = 0;
  unsigned precision_bits = 0;
  int sample_digits = 0;
  DigitTable digits;
  std::vector<double> digit_frequencies;
  double sigma = 0.0;  // binomial sd of one position's frequency of a digit at 1/base
  std::vector<WeylSeries> weyl;
  std::vector<DelSeries> del;
};

/// Fixed-point precision needed for the configured digits and Weyl sums.
inline unsigned required_bits(const NormalityConfig& cfg) {
  double bits = static_cast<double>(cfg.digit_count + cfg.digit_offset) * std::log2(static_cast<double>(cfg.base));
  if (cfg.weyl_samples > 0 && cfg.weyl_n_max > 0) {
    std::int64_t hmax = 1;
    for (auto h : cfg.h_list) hmax = std::max<std::int64_t>(hmax, h >= 0 ? h : -h);
    const mpz_class top = cfg.sequence.term(std::min(cfg.weyl_n_max, cfg.sequence.max_length())) * static_cast<long>(hmax);
    bits = std::max(bits, static_cast<double>(mpz_sizeinbase(top.get_mpz_t(), 2)) + 20.0);
  }
  return static_cast<unsigned>(std::ceil(bits)) + 64;
}

inline NormalityReport normality_report(const DerivedIfs& ifs, const PhaseSpec& phase, const NormalityConfig& cfg) {
  detail::require(cfg.sample_count >= 1, ErrorCode::InvalidArgument, "sample_count must be positive");
  detail::require(cfg.weyl_samples <= cfg.sample_count, ErrorCode::InvalidArgument,
                  "weyl_samples exceeds sample_count");
  NormalityReport rep;
  rep.base = cfg.base;
  rep.sample_count = cfg.sample_count;
  rep.precision_bits = required_bits(cfg);
  const PreciseSampler sampler(ifs, phase, rep.precision_bits);
  rep.sample_digits = sampler.digits();
  std::vector<FixedReal> values(cfg.sample_count);
  parallel_for(values.size(), cfg.threads, [&](std::size_t i) { values[i] = sampler(cfg.seed, i); });

  rep.digits = digit_frequencies(values, cfg.base, cfg.digit_count, cfg.digit_offset);
  rep.digit_frequencies = rep.digits.frequencies();
  const double p = 1.0 / static_cast<double>(cfg.base);
  rep.sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.sample_count));

  if (cfg.weyl_samples > 0 && cfg.weyl_n_max > 0) {
    const std::vector<FixedReal> head(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cfg.weyl_samples));
    for (auto h : cfg.h_list) rep.weyl.push_back({h, weyl_sums(head, cfg.sequence, h, cfg.weyl_n_max, cfg.threads)});
  }
  if (cfg.del_n_max > 0) {
    const OscillatoryIntegrator integrator(ifs, phase, WeightSpec::constant(1.0),
                                           OscillatoryOptions{kDefaultAtomBudget, cfg.threads, phase.linear()});
    const TransformEval eval = [&](double xi) { return integrator(xi, cfg.del_tol).value; };
    for (auto h : cfg.h_list) {
      DelSeries s;
      s.h = h;
      s.points = del_partial_sums(eval, h, cfg.sequence, cfg.del_n_max);
      s.slope = increment_log_slope(s.points);
      s.diverges = slope_diverges(s.slope.slope);
      rep.del.push_back(std::move(s));
    }
  }
  return rep;
}

}  // namespace fracdecay
