#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>

namespace ep {

/// Sign-tracked log-magnitude scalar.
///
/// Represents v = sign * exp(logmag). Exact zero is sign == 0; logmag is
/// meaningless in that state. Multiplication is exact in log space; addition
/// goes through log-sum-exp with sign resolution, so alternating sums of
/// hugely different magnitudes stay representable long after double overflow.
struct LogValue {
  int sign = 0;
  double logmag = -std::numeric_limits<double>::infinity();

  constexpr LogValue() = default;
  constexpr LogValue(int s, double lm) : sign(s), logmag(lm) {}

  static LogValue zero() { return LogValue(); }
  static LogValue one() { return LogValue(1, 0.0); }

  static LogValue from_double(double v) {
    if (v == 0.0) return zero();
    return LogValue(v > 0 ? 1 : -1, std::log(std::abs(v)));
  }
  // v = sign * exp(lm)
  static LogValue from_log(double lm, int sign = 1) {
    return LogValue(sign, lm);
  }

  double to_double() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(logmag);
  }
  bool is_zero() const { return sign == 0; }

  LogValue operator-() const { return LogValue(-sign, logmag); }

  friend LogValue operator*(const LogValue& a, const LogValue& b) {
    if (a.sign == 0 || b.sign == 0) return zero();
    return LogValue(a.sign * b.sign, a.logmag + b.logmag);
  }

  friend LogValue operator/(const LogValue& a, const LogValue& b) {
    if (a.sign == 0) return zero();
    return LogValue(a.sign * b.sign, a.logmag - b.logmag);
  }

  friend LogValue operator+(const LogValue& a, const LogValue& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    // order so |a| >= |b|
    const LogValue& hi = (a.logmag >= b.logmag) ? a : b;
    const LogValue& lo = (a.logmag >= b.logmag) ? b : a;
    double d = lo.logmag - hi.logmag;  // <= 0
    if (hi.sign == lo.sign)
      return LogValue(hi.sign, hi.logmag + std::log1p(std::exp(d)));
    double m = std::exp(d);
    if (m == 1.0) return zero();  // exact cancellation
    return LogValue(hi.sign, hi.logmag + std::log1p(-m));
  }

  friend LogValue operator-(const LogValue& a, const LogValue& b) {
    return a + (-b);
  }

  LogValue& operator*=(const LogValue& o) { return *this = *this * o; }
  LogValue& operator+=(const LogValue& o) { return *this = *this + o; }

  LogValue pow_int(long k) const {
    if (k == 0) return one();
    if (sign == 0) return zero();
    int s = (sign < 0 && (k % 2 != 0)) ? -1 : 1;
    return LogValue(s, logmag * static_cast<double>(k));
  }
};

/// Sum of a sequence of LogValues with a record of the cancellation suffered:
/// dynamic_range = exp(max |term|) / |result|. Callers use it to flag
/// alternating sums that have burned too many digits.
struct LogSum {
  LogValue value = LogValue::zero();
  double max_term_logmag = -std::numeric_limits<double>::infinity();

  void add(const LogValue& t) {
    if (t.sign != 0 && t.logmag > max_term_logmag) max_term_logmag = t.logmag;
    value += t;
  }
  double log_dynamic_range() const {
    if (value.sign == 0) return std::numeric_limits<double>::infinity();
    return max_term_logmag - value.logmag;
  }
};

}  // namespace ep
