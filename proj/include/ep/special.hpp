#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ep/log_value.hpp"

namespace ep {

// lgamma without the signgam global (we only ever call it on positive args).
inline double lgamma_pos(double x) {
  if (!(x > 0)) throw std::domain_error("lgamma_pos: argument must be > 0, got " + std::to_string(x));
  return std::lgamma(x);
}

/// log of the rising factorial (x)_(a) = Gamma(x+a)/Gamma(x), real order a.
/// Requires x > 0 and x + a > 0; integer a reproduces x(x+1)...(x+a-1).
inline double log_rising(double x, double a) {
  if (!(x > 0) || !(x + a > 0))
    throw std::domain_error("log_rising: need x > 0 and x + a > 0 (x=" + std::to_string(x) +
                            ", a=" + std::to_string(a) + ")");
  if (a == 0.0) return 0.0;
  return lgamma_pos(x + a) - lgamma_pos(x);
}

namespace detail {

// Stirling-series correction: lgamma(x) = (x-1/2)log x - x + log(2pi)/2 + S(x)
inline double stirling_tail(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 +
                                      r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

}  // namespace detail

/// log of Gamma(x+delta)/Gamma(x) computed as a *difference*, not as two
/// independent lgamma calls. For large x a single lgamma value carries an
/// absolute rounding error of order ulp(x log x), which destroys identities
/// between estimator routes at the 1e-12 level; the Stirling-series
/// difference keeps every intermediate O(|delta| log x). Requires x > 0 and
/// x + delta > 0; intended for |delta| up to a few units.
inline double log_gamma_ratio(double x, double delta) {
  if (!(x > 0) || !(x + delta > 0))
    throw std::domain_error("log_gamma_ratio: need x > 0 and x + delta > 0");
  if (delta == 0.0) return 0.0;
  double shift = 0.0;
  // Gamma(x+delta)/Gamma(x) = [x/(x+delta)] Gamma(x+1+delta)/Gamma(x+1):
  // lift both arguments above the asymptotic threshold
  while (x < 12.0 || x + delta < 12.0) {
    shift -= std::log1p(delta / x);
    x += 1.0;
  }
  return shift + (x - 0.5) * std::log1p(delta / x) + delta * (std::log(x + delta) - 1.0) +
         detail::stirling_tail(x + delta) - detail::stirling_tail(x);
}

/// Rising factorial (x)_(k) of integer order for arbitrary real x, with sign
/// tracking. Zero whenever a factor x+t vanishes. Used where the argument can
/// be negative or cross zero, e.g. (-ia-b)_(n) in the generalized factorial
/// coefficient.
inline LogValue rising_signed(double x, long k) {
  if (k < 0) throw std::domain_error("rising_signed: order must be >= 0");
  int sign = 1;
  double lm = 0.0;
  for (long t = 0; t < k; ++t) {
    double f = x + static_cast<double>(t);
    if (f == 0.0) return LogValue::zero();
    if (f < 0) sign = -sign;
    lm += std::log(std::abs(f));
  }
  return LogValue(sign, lm);
}

/// Falling factorial (x)_[k] = x(x-1)...(x-k+1) as a LogValue.
inline LogValue falling(double x, long k) {
  if (k < 0) throw std::domain_error("falling: order must be >= 0");
  return rising_signed(x - static_cast<double>(k - 1), k);
}

inline double log_factorial(long n) { return lgamma_pos(static_cast<double>(n) + 1.0); }

/// log C(n, k) for integer n >= k >= 0.
inline double log_binomial(long n, long k) {
  if (k < 0 || k > n) throw std::domain_error("log_binomial: need 0 <= k <= n");
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Binomial C(a, k) with real upper argument and integer k >= 0,
/// C(a, k) = (a-k+1)_(k) / k!. Sign-tracked (a may be negative or small).
inline LogValue binomial_real(double a, long k) {
  if (k < 0) return LogValue::zero();
  return rising_signed(a - static_cast<double>(k) + 1.0, k) /
         LogValue::from_log(log_factorial(k));
}

}  // namespace ep
