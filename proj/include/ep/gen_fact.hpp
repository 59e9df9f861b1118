#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ep/exact.hpp"
#include "ep/log_value.hpp"
#include "ep/special.hpp"

namespace ep {

/// Noncentral generalized factorial coefficient
///   C(n, k; s, r) = (1/k!) * sum_{i=0..k} (-1)^i binom(k,i) (-i*s - r)_(n).
///
/// The alternating sum cancels catastrophically in floating point once n is
/// large, so there are two routes:
///  - an exact route over dyadic rationals (every double is one), used for
///    n <= 500 where the bignum cost is negligible;
///  - a compensated log-domain float route for larger n, which reports how
///    many digits the cancellation burned so callers can reject the result.
inline constexpr long kGenFactExactMaxN = 500;
// dynamic range past which the float route is considered untrustworthy
inline const double kGenFactFlagLogRange = std::log(1e12);

struct GenFact {
  LogValue value;
  bool exact = false;
  double log_dynamic_range = 0.0;
  bool cancellation_flagged = false;
};

namespace detail {

// (-i*s - r)_(n) for i = 0..imax, exactly, as scaled integers over 2^(d*n):
// with s = s_num/2^d and r = r_num/2^d, each rising factor is
// (-i*s_num - r_num + t*2^d) / 2^d.
inline std::vector<BigInt> rising_numerators(long n, long imax, const Dyadic& s,
                                             const Dyadic& r, long d) {
  BigInt s_num = s.num << (d - s.shift);
  BigInt r_num = r.num << (d - r.shift);
  BigInt two_d = BigInt(1) << d;
  std::vector<BigInt> out(imax + 1);
  for (long i = 0; i <= imax; ++i) {
    BigInt base = -BigInt(i) * s_num - r_num;
    BigInt prod = 1;
    BigInt factor = base;
    for (long t = 0; t < n; ++t) {
      prod *= factor;
      if (prod == 0) break;
      factor += two_d;
    }
    out[i] = prod;
  }
  return out;
}

inline LogValue genfact_from_numerators(const std::vector<BigInt>& rising_num, long n, long k,
                                        long d) {
  BigInt total = 0;
  for (long i = 0; i <= k; ++i) {
    BigInt term = bigint_binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(i)) *
                  rising_num[i];
    if (i % 2 == 0)
      total += term;
    else
      total -= term;
  }
  if (total == 0) return LogValue::zero();
  double lm = log_abs(total) - static_cast<double>(n) * static_cast<double>(d) * std::log(2.0) -
              log_factorial(k);
  return LogValue(sgn(total) > 0 ? 1 : -1, lm);
}

}  // namespace detail

/// All of C(n, k'; s, r) for k' = 0..kmax, exact route. The rising factorials
/// (-i*s - r)_(n) depend on i only, so one batch shares them across all k'.
inline std::vector<LogValue> gen_fact_row_exact(long n, long kmax, double s, double r) {
  if (n < 0 || kmax < 0) throw std::domain_error("gen_fact_row_exact: negative argument");
  Dyadic ds = Dyadic::from_double(s);
  Dyadic dr = Dyadic::from_double(r);
  long d = std::max(ds.shift, dr.shift);
  std::vector<BigInt> rising_num = detail::rising_numerators(n, kmax, ds, dr, d);
  std::vector<LogValue> out(kmax + 1);
  for (long k = 0; k <= kmax; ++k) out[k] = detail::genfact_from_numerators(rising_num, n, k, d);
  return out;
}

inline GenFact gen_fact_coeff_exact(long n, long k, double s, double r) {
  Dyadic ds = Dyadic::from_double(s);
  Dyadic dr = Dyadic::from_double(r);
  long d = std::max(ds.shift, dr.shift);
  std::vector<BigInt> rising_num = detail::rising_numerators(n, k, ds, dr, d);
  return GenFact{detail::genfact_from_numerators(rising_num, n, k, d), true, 0.0, false};
}

inline GenFact gen_fact_coeff_float(long n, long k, double s, double r) {
  if (n < 0 || k < 0) throw std::domain_error("gen_fact_coeff: negative argument");
  LogSum acc;
  for (long i = 0; i <= k; ++i) {
    LogValue t = LogValue::from_log(log_binomial(k, i)) *
                 rising_signed(-static_cast<double>(i) * s - r, n);
    if (i % 2 != 0) t = -t;
    acc.add(t);
  }
  LogValue v = acc.value / LogValue::from_log(log_factorial(k));
  double range = acc.log_dynamic_range();
  return GenFact{v, false, range, range > kGenFactFlagLogRange};
}

inline GenFact gen_fact_coeff(long n, long k, double s, double r) {
  if (n < 0 || k < 0) throw std::domain_error("gen_fact_coeff: negative argument");
  if (n <= kGenFactExactMaxN) return gen_fact_coeff_exact(n, k, s, r);
  return gen_fact_coeff_float(n, k, s, r);
}

}  // namespace ep
