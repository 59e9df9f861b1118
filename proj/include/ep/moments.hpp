#pragma once

#include <cmath>
#include <stdexcept>

#include "ep/log_value.hpp"
#include "ep/params.hpp"
#include "ep/special.hpp"

namespace ep {

/// A point of a moment generating function G(y) = E[(1-y)^{-X}], with the
/// tilt kept in both coordinates: y = 1 - e^{-lambda}.
struct MgfPoint {
  double y = 0.0;
  double lambda = 0.0;
  double value = 1.0;

  static MgfPoint from_y(double y, double value) {
    check_y(y);
    return {y, -std::log1p(-y), value};
  }
  static MgfPoint from_lambda(double lambda, double value) {
    if (!(lambda >= 0)) throw std::domain_error("MgfPoint: lambda must be >= 0");
    return {-std::expm1(-lambda), lambda, value};
  }
  static void check_y(double y) {
    if (!(y >= 0.0 && y < 1.0)) throw std::domain_error("mgf: y must lie in [0, 1)");
  }
};

namespace detail {

// log of (1-alpha)_(l-1) / l!
inline double log_block_weight(double alpha, long l) {
  return log_rising(1.0 - alpha, static_cast<double>(l - 1)) - log_factorial(l);
}

// log of prod_{t=1}^{i-1} (theta + t*alpha); all factors positive for theta > -alpha
inline double log_theta_ladder(double theta, double alpha, long i) {
  double s = 0.0;
  for (long t = 1; t < i; ++t) s += std::log(theta + static_cast<double>(t) * alpha);
  return s;
}

inline void check_moment_args(long n, long l, long r) {
  if (l < 1 || l > n) throw std::domain_error("moment: need 1 <= l <= n");
  if (r < 0) throw std::domain_error("moment: need r >= 0");
}

}  // namespace detail

/// E[(M_{l,n})_(r)], the rising factorial moment of the number of blocks of
/// size l in a sample of size n. One expression covers all theta > -alpha:
/// the ratio prod_{t=0}^{i-1}(theta+t*alpha) / (theta)_(n) is reduced by the
/// common theta factor, after which it reproduces the theta = 0 display as
/// well. Terms are positive, so the log-domain sum needs no cancellation.
inline double rising_moment_M(const Params& params, long n, long l, long r) {
  detail::check_moment_args(n, l, r);
  if (r == 0) return 1.0;
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double log_c = detail::log_block_weight(alpha, l);
  const double log_den = log_rising(theta + 1.0, static_cast<double>(n - 1));
  LogValue acc = LogValue::zero();
  const long imax = std::min(r, n / l);
  for (long i = 1; i <= imax; ++i) {
    double lt = log_binomial(r - 1, i - 1) + log_factorial(r) - log_factorial(i);
    lt += static_cast<double>(i) * log_c;
    lt += detail::log_theta_ladder(theta, alpha, i);
    lt -= log_den;
    LogValue t = LogValue::from_log(lt) * falling(static_cast<double>(n), i * l);
    t *= LogValue::from_log(log_rising(theta + static_cast<double>(i) * alpha,
                                       static_cast<double>(n - i * l)));
    acc += t;
  }
  return acc.to_double();
}

/// E[(N_{l,m}^{(n)})_(r) | K_n = j]: conditional rising factorial moment of
/// the number of *new* blocks of size l after m additional draws. Depends on
/// the initial sample only through (n, j); the block frequencies never enter.
inline double cond_rising_moment_N(const Params& params, long n, long j, long m, long l, long r) {
  if (n < 1 || j < 1 || j > n) throw std::domain_error("cond moment: need 1 <= j <= n");
  if (m < 0 || r < 0 || l < 1) throw std::domain_error("cond moment: bad m, l or r");
  if (r == 0) return 1.0;
  if (l > m) return 0.0;  // empty index range: cannot build a new block of size l > m
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double log_c = detail::log_block_weight(alpha, l);
  const double log_den = log_rising(theta + static_cast<double>(n), static_cast<double>(m));
  LogValue acc = LogValue::zero();
  const long imax = std::min(r, m / l);
  for (long i = 1; i <= imax; ++i) {
    double lt = log_binomial(r - 1, i - 1) + log_factorial(r) - log_factorial(i);
    lt += static_cast<double>(i) * log_c;
    for (long t = 0; t < i; ++t)
      lt += std::log(theta + static_cast<double>(j + t) * alpha);
    lt -= log_den;
    LogValue v = LogValue::from_log(lt) * falling(static_cast<double>(m), i * l);
    v *= LogValue::from_log(log_rising(theta + static_cast<double>(i) * alpha + n,
                                       static_cast<double>(m - i * l)));
    acc += v;
  }
  return acc.to_double();
}

/// log G_{M_{l,n}}(y; alpha, 0), the closed moment generating function at
/// theta = 0. Each term is written through gamma functions,
///   n * Gamma(n-il+i*alpha) / (Gamma(n-il+1) Gamma(i*alpha+1)),
/// which evaluates the displayed n/(n-il) * binom(...) everywhere it is
/// regular and continues it across the n-il = 0 boundary, where the factor
/// becomes n/(i*alpha). That continuation (rather than the bare n) is what
/// reproduces G_{M_{1,1}}(y) = 1/(1-y) exactly.
inline double log_mgf_M(double alpha, long n, long l, double y) {
  MgfPoint::check_y(y);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("mgf_M: alpha must lie in (0,1)");
  detail::check_moment_args(n, l, 1);
  if (y == 0.0) return 0.0;
  const double log_ytil =
      std::log(y) - std::log1p(-y) + std::log(alpha) + detail::log_block_weight(alpha, l);
  LogValue acc = LogValue::zero();
  for (long i = 0; i <= n / l; ++i) {
    const double rem = static_cast<double>(n - i * l);
    const double ia = static_cast<double>(i) * alpha;
    double lt = static_cast<double>(i) * log_ytil + std::log(static_cast<double>(n)) +
                lgamma_pos(rem + ia) - lgamma_pos(rem + 1.0) - lgamma_pos(ia + 1.0);
    if (i == 0) lt = 0.0;  // empty product: the term is exactly 1
    acc += LogValue::from_log(lt);
  }
  return acc.logmag;
}

inline double mgf_M(double alpha, long n, long l, double y) {
  return std::exp(log_mgf_M(alpha, n, l, y));
}

/// log G_{N_{l,m}^{(n)}}(y; alpha, 0), the conditional counterpart. The
/// (i*alpha+n)/(m-il) * binom(...) factor is likewise evaluated as
///   Gamma(n+m-il+i*alpha) / (Gamma(m-il+1) Gamma(n+i*alpha)),
/// whose m-il = 0 continuation is exactly 1.
inline double log_mgf_N_cond(double alpha, long n, long j, long m, long l, double y) {
  MgfPoint::check_y(y);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("mgf_N_cond: alpha must lie in (0,1)");
  if (n < 1 || j < 1 || j > n || m < 1 || l < 1)
    throw std::domain_error("mgf_N_cond: bad arguments");
  if (y == 0.0) return 0.0;
  const double log_ytil =
      std::log(y) - std::log1p(-y) + std::log(alpha) + detail::log_block_weight(alpha, l);
  const double log_prefix = log_factorial(m) - log_rising(static_cast<double>(n),
                                                          static_cast<double>(m));
  LogValue acc = LogValue::zero();
  for (long i = 0; i <= m / l; ++i) {
    const double rem = static_cast<double>(m - i * l);
    const double ia = static_cast<double>(i) * alpha;
    double lt = static_cast<double>(i) * log_ytil + log_binomial(j + i - 1, i) +
                lgamma_pos(static_cast<double>(n) + rem + ia) - lgamma_pos(rem + 1.0) -
                lgamma_pos(static_cast<double>(n) + ia);
    acc += LogValue::from_log(lt);
  }
  return log_prefix + acc.logmag;
}

inline double mgf_N_cond(double alpha, long n, long j, long m, long l, double y) {
  return std::exp(log_mgf_N_cond(alpha, n, j, m, l, y));
}

/// Truncated series G = sum_i y^i/i! E[(M_{l,n})_(i)] with a certified tail
/// bound from M_{l,n} <= floor(n/l): the tail is dominated by the series of
/// (1-y)^{-B}, whose term ratio y(B+i)/(i+1) eventually drops below one.
struct SeriesResult {
  double value = 0.0;
  double truncation_bound = 0.0;
  long terms = 0;
};

inline SeriesResult mgf_M_series(const Params& params, long n, long l, double y,
                                 long max_terms = 400, double rel_tol = 1e-12) {
  MgfPoint::check_y(y);
  detail::check_moment_args(n, l, 1);
  if (max_terms < 1) throw std::domain_error("mgf_M_series: max_terms must be >= 1");
  const long B = n / l;
  LogValue acc = LogValue::one();
  long i = 1;
  double log_y = (y > 0) ? std::log(y) : -std::numeric_limits<double>::infinity();
  for (; i <= max_terms; ++i) {
    double mom = rising_moment_M(params, n, l, i);
    if (mom > 0)
      acc += LogValue::from_log(static_cast<double>(i) * log_y - log_factorial(i) +
                                std::log(mom));
    // dominating tail term u_{i+1} = y^{i+1} C(B+i, i+1) and its ratio bound
    double log_u = static_cast<double>(i + 1) * log_y + log_binomial(B + i, i + 1);
    double q = y * static_cast<double>(B + i + 1) / static_cast<double>(i + 2);
    if (q < 1.0) {
      double bound = std::exp(log_u) / (1.0 - q);
      if (bound <= rel_tol * acc.to_double())
        return SeriesResult{acc.to_double(), bound, i};
    }
  }
  // one more bound evaluation at the cap
  double log_u = static_cast<double>(i) * log_y + log_binomial(B + i - 1, i);
  double q = y * static_cast<double>(B + i) / static_cast<double>(i + 1);
  double bound = (q < 1.0) ? std::exp(log_u) / (1.0 - q)
                           : std::numeric_limits<double>::infinity();
  if (!(bound <= rel_tol * acc.to_double()))
    throw std::runtime_error("mgf_M_series: tail bound " + std::to_string(bound) +
                             " still above tolerance after " + std::to_string(max_terms) +
                             " terms");
  return SeriesResult{acc.to_double(), bound, max_terms};
}

/// Closed theta-general MGF of M_{l,n} (the i-indexed sum with coefficients
/// D(alpha,theta,n,i)). Small-n cross-check against mgf_M_series only; the
/// large deviation layer always goes through the theta = 0 reduction.
inline double mgf_M_theta_closed(const Params& params, long n, long l, double y) {
  MgfPoint::check_y(y);
  const double alpha = params.alpha();
  const double theta = params.theta();
  if (!(alpha > 0.0)) throw std::domain_error("mgf_M_theta_closed: alpha must be positive");
  detail::check_moment_args(n, l, 1);
  if (y == 0.0) return 1.0;
  const double log_ytil =
      std::log(y) - std::log1p(-y) + std::log(alpha) + detail::log_block_weight(alpha, l);
  LogValue acc = LogValue::zero();
  for (long i = 0; i <= n / l; ++i) {
    const double rem = static_cast<double>(n - i * l);
    const double ia = static_cast<double>(i) * alpha;
    double lt;
    if (i == 0) {
      lt = 0.0;
    } else {
      lt = static_cast<double>(i) * log_ytil + std::log(static_cast<double>(n)) +
           lgamma_pos(rem + ia) - lgamma_pos(rem + 1.0) - lgamma_pos(ia + 1.0);
      // D(alpha, theta, n, i)
      lt += lgamma_pos(static_cast<double>(n)) -
            log_rising(theta + 1.0, static_cast<double>(n - 1));
      lt += log_rising(theta / alpha + 1.0, static_cast<double>(i - 1)) - lgamma_pos(static_cast<double>(i));
      lt += log_rising(theta + ia, rem) - log_rising(ia, rem);
    }
    acc += LogValue::from_log(lt);
  }
  return acc.to_double();
}

/// The overshoot sum subtracted inside the lower sandwich bound: indices
/// i = floor(m/l)+1 .. floor((n+m)/l) of the size-(n+m) MGF, without the
/// n/(n-il) factor. Zero-width index ranges give 0.
inline double mgf_sandwich_correction(double alpha, long n, long m, long l, double y) {
  MgfPoint::check_y(y);
  const double log_ytil =
      std::log(y) - std::log1p(-y) + std::log(alpha) + detail::log_block_weight(alpha, l);
  LogValue acc = LogValue::zero();
  for (long i = m / l + 1; i <= (n + m) / l; ++i) {
    const long rem = n + m - i * l;
    if (rem < 1) continue;  // binom(..., rem-1) with rem-1 < 0 vanishes
    const double ia = static_cast<double>(i) * alpha;
    double lt = static_cast<double>(i) * log_ytil + lgamma_pos(static_cast<double>(rem) + ia) -
                lgamma_pos(static_cast<double>(rem)) - lgamma_pos(ia + 1.0);
    acc += LogValue::from_log(lt);
  }
  return acc.to_double();
}

}  // namespace ep
