#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>

#include "ep/log_value.hpp"

namespace ep {

// Arbitrary-precision signed integer. GMP does the heavy lifting; we only
// add the conversions the numeric code needs.
using BigInt = mpz_class;

/// A double decomposed as an exact dyadic rational num / 2^shift, shift >= 0.
/// Every finite double has such a form, so "rational inputs" below means any
/// double at all; the decomposition is exact, not a nearest-rational guess.
struct Dyadic {
  BigInt num;
  long shift = 0;

  static Dyadic from_double(double v) {
    if (!std::isfinite(v)) throw std::domain_error("Dyadic: non-finite value");
    Dyadic d;
    if (v == 0.0) return d;
    int e = 0;
    double m = std::frexp(v, &e);  // v = m * 2^e, |m| in [0.5, 1)
    double scaled = std::ldexp(m, 53);  // integer
    d.num = BigInt(scaled);
    long p = e - 53;
    if (p >= 0) {
      d.num <<= p;
      d.shift = 0;
    } else {
      d.shift = -p;
    }
    // strip common powers of two
    while (d.shift > 0 && mpz_even_p(d.num.get_mpz_t())) {
      d.num >>= 1;
      --d.shift;
    }
    return d;
  }
};

/// natural log of |z| for a BigInt, accurate to double precision at any size.
inline double log_abs(const BigInt& z) {
  if (z == 0) throw std::domain_error("log_abs: zero");
  signed long exp2 = 0;
  double m = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(std::abs(m)) + static_cast<double>(exp2) * std::log(2.0);
}

inline LogValue to_log_value(const BigInt& z) {
  if (z == 0) return LogValue::zero();
  return LogValue(sgn(z) > 0 ? 1 : -1, log_abs(z));
}

inline BigInt bigint_binomial(unsigned long n, unsigned long k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline BigInt bigint_factorial(unsigned long n) {
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

}  // namespace ep
