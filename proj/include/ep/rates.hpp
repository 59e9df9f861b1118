#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ep/special.hpp"

namespace ep {

/// Solver and evaluation constants for the rate-function layer.
struct RateConfig {
  double root_rel_tol = 1e-12;    // residual contract for h2(eps0) = h1(lambda)
  int bisect_max_iter = 200;      // bisection iterations for eps0
  int golden_max_iter = 120;      // golden-section iterations for the Legendre sup
  double plateau_lambda = 60.0;   // per unit l: evaluation point for x at the domain edge
  double edge_rel = 1e-6;         // x within this relative distance of 1/l uses the plateau
  double lambda_cap = 1e6;        // safety cap for the doubling search
};

inline const RateConfig& default_rate_config() {
  static const RateConfig cfg{};
  return cfg;
}

namespace detail {

inline void check_alpha_l(double alpha, long l) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("rate: alpha must lie in (0,1)");
  if (l < 1) throw std::domain_error("rate: l must be >= 1");
}

// log( alpha (1-alpha)_(l-1) / (alpha^alpha l!) )
inline double h1_constant(double alpha, long l) {
  return std::log(alpha) + log_rising(1.0 - alpha, static_cast<double>(l - 1)) -
         alpha * std::log(alpha) - log_factorial(l);
}

// h2 written in terms of s = log u with u = 1 - l*eps. Strictly decreasing in
// s, with h2 -> +inf as s -> -inf and -> -inf as s -> 0-. This is the only
// parameterization that survives large lambda: u ~ e^{-lambda/l} underflows
// eps-space bisection long before the transform needs it.
inline double h2_log_u(double s, double alpha, long l) {
  const double u = std::exp(s);
  const double A = alpha + (static_cast<double>(l) - alpha) * u;  // = l*(1-(l-alpha)*eps)
  return static_cast<double>(l) * (std::log(A) - std::log(static_cast<double>(l)) - s) +
         alpha * (std::log1p(-u) - std::log(A));
}

// s* = log(1 - l*eps0) solving h2 = h1(lambda), by bisection on s.
inline double epsilon0_log_u(double lambda, double alpha, long l,
                             const RateConfig& cfg = default_rate_config()) {
  if (!(lambda > 0)) throw std::domain_error("epsilon0: lambda must be > 0");
  const double target = lambda + std::log(-std::expm1(-lambda)) + h1_constant(alpha, l);
  double hi = -1e-300;  // s -> 0-: h2 -> -inf
  // asymptotically -l*s ~ target - l*log(alpha/l), so this lower end brackets
  double lo = std::min(-1.0, (static_cast<double>(l) * std::log(alpha / static_cast<double>(l)) -
                              target) / static_cast<double>(l) - 10.0);
  while (h2_log_u(lo, alpha, l) < target) lo *= 2.0;
  for (int it = 0; it < cfg.bisect_max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h2_log_u(mid, alpha, l) > target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * std::max(1.0, -lo)) break;
  }
  return 0.5 * (lo + hi);
}

/// sup_{lambda >= 0} { lambda*x - cgf(lambda) } for a convex cgf with
/// cgf(0) = 0, effective domain [0, x_sup] and slope -> x_sup^{-1}... the
/// concave objective is maximized by golden section after doubling lambda
/// until the finite-difference slope turns negative.
inline double legendre_sup(const std::function<double(double)>& cgf, double x, double x_sup,
                           double plateau_lambda, const RateConfig& cfg) {
  if (x < 0.0 || x > x_sup) return std::numeric_limits<double>::infinity();
  if (x == 0.0) return 0.0;
  if (x >= x_sup * (1.0 - cfg.edge_rel))
    return std::max(0.0, plateau_lambda * x - cgf(plateau_lambda));
  double lam_max = 1.0;
  while (lam_max < cfg.lambda_cap) {
    const double h = 1e-4 * lam_max;
    double slope = (cgf(lam_max + h) - cgf(lam_max)) / h;
    if (slope > x) break;  // objective now decreasing: the sup is bracketed
    lam_max *= 2.0;
  }
  auto f = [&](double lam) { return lam * x - cgf(lam); };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = lam_max;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < cfg.golden_max_iter; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::max(0.0, f(0.5 * (a + b)));
}

}  // namespace detail

/// h1(lambda) = lambda + log((e^lambda - 1)/e^lambda) + log(a(1-a)_(l-1)/(a^a l!))
inline double h1(double lambda, double alpha, long l) {
  detail::check_alpha_l(alpha, l);
  if (!(lambda > 0)) throw std::domain_error("h1: lambda must be > 0");
  return lambda + std::log(-std::expm1(-lambda)) + detail::h1_constant(alpha, l);
}

/// h2(eps) = l log((1-(l-a)eps)/(1-l eps)) + a log(eps/(1-(l-a)eps))
inline double h2(double eps, double alpha, long l) {
  detail::check_alpha_l(alpha, l);
  if (!(eps > 0 && eps < 1.0 / static_cast<double>(l)))
    throw std::domain_error("h2: eps must lie in (0, 1/l)");
  const double a = 1.0 - (static_cast<double>(l) - alpha) * eps;
  return static_cast<double>(l) * std::log(a / (1.0 - static_cast<double>(l) * eps)) +
         alpha * std::log(eps / a);
}

/// The unique root of h2(eps) = h1(lambda) in (0, 1/l).
inline double epsilon0(double lambda, double alpha, long l,
                       const RateConfig& cfg = default_rate_config()) {
  detail::check_alpha_l(alpha, l);
  double s = detail::epsilon0_log_u(lambda, alpha, l, cfg);
  return -std::expm1(s) / static_cast<double>(l);
}

/// Scaled cumulant generating function of M_{l,n}/n:
/// log(1 + alpha*eps0/(1 - l*eps0)) for lambda > 0, zero for lambda <= 0.
/// Evaluated through s = log(1 - l*eps0) so that the large-lambda regime,
/// where Lambda grows like lambda/l, keeps full precision.
inline double cgf_M(double lambda, double alpha, long l,
                    const RateConfig& cfg = default_rate_config()) {
  detail::check_alpha_l(alpha, l);
  if (lambda <= 0) return 0.0;
  const double s = detail::epsilon0_log_u(lambda, alpha, l, cfg);
  const double u = std::exp(s);
  // 1 + alpha*eps0/u = (alpha + (l-alpha)u) / (l*u)
  return std::log(alpha + (static_cast<double>(l) - alpha) * u) -
         std::log(static_cast<double>(l)) - s;
}

/// Rate function of M_{l,n}/n: Legendre transform of cgf_M. +inf outside
/// [0, 1/l], zero at zero, finite on (0, 1/l].
inline double rate_M(double x, double alpha, long l,
                     const RateConfig& cfg = default_rate_config()) {
  detail::check_alpha_l(alpha, l);
  return detail::legendre_sup([&](double lam) { return cgf_M(lam, alpha, l, cfg); }, x,
                              1.0 / static_cast<double>(l),
                              cfg.plateau_lambda * static_cast<double>(l), cfg);
}

/// Closed-form rate for alpha = 1/2, l = 1. B1 is the unique positive root of
/// (1-x)^2 B^3 + 2(1-x) B^2 + (1-x)^2 B - 2x = 0, via the trigonometric
/// solution of the depressed cubic. x = 1 collapses the cubic, so that point
/// is its own branch with value log 2.
inline double closed_half_B1(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("closed_half_B1: x must lie in [0,1)");
  const double om = 1.0 - x;
  const double p = 1.0 - 4.0 / (3.0 * om * om);
  const double q = (16.0 - 18.0 * om * om - 54.0 * x * om) / (27.0 * om * om * om);
  double arg = (3.0 * q / (2.0 * p)) * std::sqrt(-3.0 / p);
  arg = std::min(1.0, std::max(-1.0, arg));
  return 2.0 * std::sqrt(-p / 3.0) * std::cos(std::acos(arg) / 3.0) - 2.0 / (3.0 * om);
}

inline double rate_closed_half(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("rate_closed_half: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return std::log(2.0);
  const double b = closed_half_B1(x);
  return x * std::log1p(b) + std::log(2.0) - std::log(1.0 + std::sqrt(b * b + 1.0));
}

/// Lambda_alpha(lambda) = -log(1 - (1 - e^{-lambda})^{1/alpha}) for lambda > 0,
/// zero otherwise: the CGF behind the K_n/n large deviation principle.
inline double cgf_K(double lambda, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("cgf_K: alpha must lie in (0,1)");
  if (lambda <= 0) return 0.0;
  const double t = std::log1p(-std::exp(-lambda)) / alpha;  // log y^(1/alpha), t < 0
  return -std::log(-std::expm1(t));
}

/// Rate function of K_n/n: Legendre transform of cgf_K; +inf outside [0,1].
inline double rate_K(double x, double alpha, const RateConfig& cfg = default_rate_config()) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("rate_K: alpha must lie in (0,1)");
  return detail::legendre_sup([&](double lam) { return cgf_K(lam, alpha); }, x, 1.0,
                              cfg.plateau_lambda, cfg);
}

/// Speed-log(n) rate function of K_n/log n in the alpha = 0 model:
/// x log(x/theta) - x + theta for x > 0, theta at x = 0, +inf below.
inline double rate_K_ewens(double x, double theta) {
  if (!(theta > 0)) throw std::domain_error("rate_K_ewens: theta must be > 0");
  if (x < 0) return std::numeric_limits<double>::infinity();
  if (x == 0) return theta;
  return x * std::log(x / theta) - x + theta;
}

/// A sampled rate curve (x, I(x)) with x ascending over [0, 1/l].
struct RateCurve {
  double alpha = 0.0;
  long l = 1;
  std::vector<std::pair<double, double>> grid;

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "x,I\n";
    for (auto [x, I] : grid) os << x << ',' << I << '\n';
    return os.str();
  }
};

/// Evaluates I_l^alpha over a uniform grid, optionally through the alpha=1/2,
/// l=1 closed form. Grid points are independent, so they are split statically
/// over threads; output order is by index regardless of the thread count.
inline RateCurve make_rate_curve(double alpha, long l, double x_min, double x_max, int points,
                                 bool use_closed_form = false, int threads = 1,
                                 const RateConfig& cfg = default_rate_config()) {
  if (points < 2) throw std::domain_error("make_rate_curve: need at least 2 grid points");
  if (!(x_min >= 0.0 && x_min < x_max)) throw std::domain_error("make_rate_curve: bad x range");
  if (use_closed_form && !(alpha == 0.5 && l == 1))
    throw std::domain_error("make_rate_curve: closed form requires alpha = 1/2, l = 1");
  RateCurve curve;
  curve.alpha = alpha;
  curve.l = l;
  curve.grid.resize(points);
  auto eval = [&](int i) {
    double x = x_min + (x_max - x_min) * static_cast<double>(i) / (points - 1);
    double I = use_closed_form ? (x > 1.0 ? std::numeric_limits<double>::infinity()
                                          : rate_closed_half(x))
                               : rate_M(x, alpha, l, cfg);
    curve.grid[i] = {x, I};
  };
  if (threads <= 1) {
    for (int i = 0; i < points; ++i) eval(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < points; i += threads) eval(i);
      });
    for (auto& th : pool) th.join();
  }
  return curve;
}

}  // namespace ep
