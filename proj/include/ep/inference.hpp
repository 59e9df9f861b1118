#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ep/gen_fact.hpp"
#include "ep/params.hpp"
#include "ep/partition.hpp"
#include "ep/rates.hpp"
#include "ep/rng.hpp"
#include "ep/special.hpp"

namespace ep {

/// E[K_n] under the model; the moment the mean-matching fit inverts.
inline double expected_K_n(const Params& params, long n) {
  if (n < 0) throw std::domain_error("expected_K_n: n must be >= 0");
  if (n == 0) return 0.0;
  const double alpha = params.alpha();
  const double theta = params.theta();
  if (alpha == 0.0) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += theta / (theta + static_cast<double>(i));
    return s;
  }
  // (theta/alpha)((theta+alpha)_(n)/(theta)_(n) - 1), with the gamma ratio
  // routed through theta+1 so every theta > -alpha (including 0) is covered:
  double d = log_gamma_ratio(theta + static_cast<double>(n), alpha) -
             log_gamma_ratio(theta + 1.0, alpha);
  return ((theta + alpha) * std::exp(d) - theta) / alpha;
}

/// E[K_m^(n) | K_n = j], the expected number of new blocks in m more draws.
inline double expected_new_blocks(const Params& params, long n, long j, long m) {
  if (n < 1 || j < 1 || j > n) throw std::domain_error("expected_new_blocks: need 1 <= j <= n");
  if (m < 0) throw std::domain_error("expected_new_blocks: m must be >= 0");
  if (m == 0) return 0.0;
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double tn = theta + static_cast<double>(n);
  if (alpha == 0.0) {
    double s = 0.0;
    for (long i = 0; i < m; ++i) s += theta / (tn + static_cast<double>(i));
    return s;
  }
  return (theta / alpha + static_cast<double>(j)) *
         std::expm1(log_gamma_ratio(tn + static_cast<double>(m), alpha) -
                    log_gamma_ratio(tn, alpha));
}

/// Posterior pmf of the number of new blocks, P[K_m^(n) = k | K_n = j] for
/// k = 0..m. The generalized factorial coefficient C(m,k;alpha,-n+alpha*j) is
/// tried in floating point first; if the resulting vector fails to sum to one
/// within 1e-8 (cancellation), everything is recomputed on the exact path.
inline std::vector<double> posterior_K_pmf(const Params& params, long n, long j, long m) {
  const double alpha = params.alpha();
  const double theta = params.theta();
  if (!(alpha > 0.0)) throw std::domain_error("posterior_K_pmf: alpha must be positive");
  if (n < 1 || j < 1 || j > n || m < 1) throw std::domain_error("posterior_K_pmf: bad arguments");
  const double r = -static_cast<double>(n) + alpha * static_cast<double>(j);
  const double log_den = log_rising(theta + static_cast<double>(n), static_cast<double>(m));
  auto assemble = [&](const std::function<LogValue(long)>& genfact_at) {
    std::vector<double> p(m + 1);
    for (long k = 0; k <= m; ++k) {
      LogValue c = genfact_at(k);
      LogValue v = c * LogValue::from_log(log_rising(theta / alpha + static_cast<double>(j),
                                                     static_cast<double>(k)) -
                                          log_den);
      p[k] = v.to_double();
    }
    return p;
  };
  auto normalized = [](const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
      if (v < -1e-12) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= 1e-8;
  };
  bool flagged = false;
  std::vector<double> p = assemble([&](long k) {
    GenFact g = gen_fact_coeff_float(m, k, alpha, r);
    flagged = flagged || g.cancellation_flagged;
    return g.value;
  });
  if (!flagged && normalized(p)) return p;
  if (m > kGenFactExactMaxN)
    throw std::runtime_error("posterior_K_pmf: float path lost precision and m exceeds the exact-path cap");
  std::vector<LogValue> row = gen_fact_row_exact(m, m, alpha, r);
  p = assemble([&](long k) { return row[k]; });
  if (!normalized(p))
    throw std::runtime_error("posterior_K_pmf: normalization check failed on the exact path");
  for (double& v : p) v = std::max(v, 0.0);
  return p;
}

/// Exact Bayesian discovery-probability estimator at draw n+m+1.
inline double discovery_estimate(const Params& params, long n, long j, long m) {
  if (n < 1 || j < 1 || j > n || m < 0) throw std::domain_error("discovery_estimate: bad arguments");
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double tn = theta + static_cast<double>(n);
  if (alpha == 0.0)
    return theta / (tn + static_cast<double>(m));
  // (theta+n+alpha)_(m)/(theta+n+1)_(m) through small-order gamma ratios
  return (theta + static_cast<double>(j) * alpha) / tn *
         std::exp(log_gamma_ratio(tn + 1.0 + static_cast<double>(m), alpha - 1.0) -
                  log_gamma_ratio(tn + 1.0, alpha - 1.0));
}

/// Normalization rates that replace the crude m^alpha / m^{alpha-1}:
///   r_M = Gamma(theta+alpha+n+m-1)/Gamma(theta+n+m) * (m1 (theta+alpha+n-1)/(theta+j alpha) + m)
///   r_D = Gamma(theta+alpha+n+m)/Gamma(theta+n+m+1).
struct CorrectedRates {
  double r_M = 0.0;
  double r_D = 0.0;
};

inline CorrectedRates corrected_rates(const Params& params, long n, long j, long m1, long m) {
  if (m < 1) throw std::domain_error("corrected_rates: m must be >= 1");
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double tnm = theta + static_cast<double>(n + m);
  CorrectedRates out;
  out.r_D = std::exp(log_gamma_ratio(tnm + 1.0, alpha - 1.0));
  out.r_M = std::exp(log_gamma_ratio(tnm, alpha - 1.0)) *
            (static_cast<double>(m1) * (theta + alpha + static_cast<double>(n) - 1.0) /
                 (theta + static_cast<double>(j) * alpha) +
             static_cast<double>(m));
  return out;
}

/// Asymptotic discovery estimator: m^{alpha-1} (or r_D, corrected) times
/// (j alpha + theta) Gamma(theta+n)/Gamma(theta+n+alpha). The corrected
/// variant equals discovery_estimate identically, which is exactly why the
/// corrected columns of the illustration tables duplicate the exact ones.
inline double discovery_asymptotic(const Params& params, long n, long j, long m, bool corrected) {
  if (m < 1) throw std::domain_error("discovery_asymptotic: m must be >= 1");
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double tn = theta + static_cast<double>(n);
  const double mean_scale = (static_cast<double>(j) * alpha + theta) *
                            std::exp(-log_gamma_ratio(tn, alpha));
  const double rate = corrected ? corrected_rates(params, n, j, 0, m).r_D
                                : std::pow(static_cast<double>(m), alpha - 1.0);
  return rate * mean_scale;
}

enum class M1Variant { exact, uncorrected, corrected };

/// Estimators of the expected singleton proportion m^{-1} M_{1,m}^{(n)}:
/// the exact two-term posterior mean, the m^{alpha-1} asymptotic (identical
/// to the discovery asymptotic), and the r_M-corrected asymptotic (identical
/// to the exact value).
inline double m1_estimate(const Params& params, long n, long j, long m1, long m,
                          M1Variant variant) {
  if (n < 1 || j < 1 || j > n || m < 1) throw std::domain_error("m1_estimate: bad arguments");
  if (m1 < 0 || m1 > j) throw std::domain_error("m1_estimate: need 0 <= m1 <= j");
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double tn = theta + static_cast<double>(n);
  switch (variant) {
    case M1Variant::exact: {
      // both Pochhammer ratios reduce to Gamma(. + alpha - 1)/Gamma(.) pairs
      const double lead = log_gamma_ratio(tn + static_cast<double>(m), alpha - 1.0);
      double a = static_cast<double>(m1) / static_cast<double>(m) *
                 std::exp(lead - log_gamma_ratio(tn, alpha - 1.0));
      double b = (theta + static_cast<double>(j) * alpha) *
                 std::exp(lead - log_gamma_ratio(tn, alpha));
      return a + b;
    }
    case M1Variant::uncorrected:
      return discovery_asymptotic(params, n, j, m, false);
    case M1Variant::corrected:
      return corrected_rates(params, n, j, m1, m).r_M / static_cast<double>(m) *
             (static_cast<double>(j) * alpha + theta) *
             std::exp(-log_gamma_ratio(tn, alpha));
  }
  throw std::logic_error("m1_estimate: unreachable");
}

/// Large deviation tail approximation exp(-m I_1^alpha(x_eff)), with
/// x_eff = x (uncorrected) or x r_M / (m r_D) (corrected). Arguments past the
/// domain edge have infinite rate, hence tail zero.
inline double ld_tail(const Params& params, long n, long j, long m1, long m, double x,
                      bool corrected, const RateConfig& cfg = default_rate_config()) {
  if (x < 0) throw std::domain_error("ld_tail: x must be >= 0");
  double x_eff = x;
  if (corrected) {
    CorrectedRates cr = corrected_rates(params, n, j, m1, m);
    x_eff = x * cr.r_M / (static_cast<double>(m) * cr.r_D);
  }
  double I = rate_M(x_eff, params.alpha(), 1, cfg);
  if (std::isinf(I)) return 0.0;
  return std::exp(-static_cast<double>(m) * I);
}

/// Tail curve of the discovery probability under both normalizations.
struct TailCurve {
  long m = 0;
  // (x, uncorrected, corrected)
  std::vector<std::tuple<double, double, double>> grid;

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "x,uncorrected,corrected\n";
    for (auto [x, u, c] : grid) os << x << ',' << u << ',' << c << '\n';
    return os.str();
  }
};

inline TailCurve make_tail_curve(const Params& params, long n, long j, long m1, long m,
                                 double x_min, double x_max, int points, int threads = 1,
                                 const RateConfig& cfg = default_rate_config()) {
  if (points < 2) throw std::domain_error("make_tail_curve: need at least 2 grid points");
  TailCurve out;
  out.m = m;
  out.grid.resize(points);
  auto eval = [&](int i) {
    double x = x_min + (x_max - x_min) * static_cast<double>(i) / (points - 1);
    out.grid[i] = {x, ld_tail(params, n, j, m1, m, x, false, cfg),
                   ld_tail(params, n, j, m1, m, x, true, cfg)};
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
  return out;
}

struct MonteCarloTail {
  double estimate = 0.0;
  double std_error = 0.0;
  long reps = 0;
};

/// Monte Carlo estimate of P[M_{l,m}^(n)/m >= x | initial partition] with a
/// binomial standard error. Rep r draws from the stream derived from
/// (seed, r), and the tally is a count, so the result does not depend on the
/// thread count.
inline MonteCarloTail tail_mc(const Params& params, const std::vector<long>& initial_sizes,
                              long l, long m, double x, long reps, std::uint64_t seed,
                              int threads = 1, long budget = 500000000L) {
  if (reps < 1) throw std::domain_error("tail_mc: reps must be >= 1");
  if (m < 0 || l < 1) throw std::domain_error("tail_mc: bad m or l");
  if (m * reps > budget)
    throw std::runtime_error("tail_mc: m*reps = " + std::to_string(m * reps) +
                             " exceeds budget " + std::to_string(budget));
  const double threshold = x * static_cast<double>(m);
  auto run_rep = [&](long r) -> long {
    Xoshiro256 rng = Xoshiro256::derive(seed, static_cast<std::uint64_t>(r));
    ConditionalState st = sample_conditional(params, initial_sizes, m, rng);
    long Ml = 0;
    auto tot = st.total_counts();
    auto it = tot.find(l);
    if (it != tot.end()) Ml = it->second;
    return static_cast<double>(Ml) >= threshold ? 1 : 0;
  };
  long hits = 0;
  if (threads <= 1) {
    for (long r = 0; r < reps; ++r) hits += run_rep(r);
  } else {
    std::vector<long> partial(threads, 0);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        long h = 0;
        for (long r = t; r < reps; r += threads) h += run_rep(r);
        partial[t] = h;
      });
    for (auto& th : pool) th.join();
    for (long h : partial) hits += h;
  }
  MonteCarloTail out;
  out.reps = reps;
  out.estimate = static_cast<double>(hits) / static_cast<double>(reps);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
  return out;
}

enum class FitMethod { mean_match, mle };

struct FitResult {
  double alpha_hat = 0.0;
  double theta_hat = 0.0;
  FitMethod method = FitMethod::mean_match;
  double log_likelihood = std::numeric_limits<double>::quiet_NaN();  // mle only
  double residual = std::numeric_limits<double>::quiet_NaN();        // mean-match only
};

/// Solves E_{alpha,theta}[K_n] = j for theta at fixed alpha, by bisection on
/// (-alpha + 1e-9, 1e7]. Reports (never clamps) targets outside the
/// attainable range, e.g. j = n, which no finite theta reaches.
inline FitResult fit_theta_mean(double alpha, long n, long j) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("fit_theta_mean: alpha not in [0,1)");
  if (j < 1 || j > n) throw std::domain_error("fit_theta_mean: need 1 <= j <= n");
  double lo = -alpha + 1e-9;
  double hi = 1e7;
  auto mean = [&](double theta) { return expected_K_n(Params(alpha, theta), n); };
  const double target = static_cast<double>(j);
  if (mean(hi) < target)
    throw std::runtime_error("fit_theta_mean: E[K_n] cannot reach j=" + std::to_string(j) +
                             " within the theta bracket (j = n is unattainable)");
  if (mean(lo) > target)
    throw std::runtime_error("fit_theta_mean: E[K_n] already exceeds j at theta = -alpha");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mean(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  FitResult out;
  out.alpha_hat = alpha;
  out.theta_hat = 0.5 * (lo + hi);
  out.method = FitMethod::mean_match;
  out.residual = std::abs(mean(out.theta_hat) - target);
  if (!(out.residual <= 1e-8))
    throw std::runtime_error("fit_theta_mean: residual " + std::to_string(out.residual) +
                             " above contract");
  return out;
}

namespace detail {

// Nelder-Mead in (alpha, log(theta+alpha)); out-of-domain points score -inf.
inline std::pair<std::array<double, 2>, double> nelder_mead_2d(
    const std::function<double(double, double)>& f, std::array<double, 2> start, int max_iter) {
  using Pt = std::array<double, 2>;
  auto eval = [&](const Pt& p) { return f(p[0], p[1]); };
  std::array<Pt, 3> simplex{start, Pt{start[0] + 0.02, start[1]}, Pt{start[0], start[1] + 0.1}};
  std::array<double, 3> val{eval(simplex[0]), eval(simplex[1]), eval(simplex[2])};
  for (int it = 0; it < max_iter; ++it) {
    // order descending (maximization)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (val[b] > val[a]) {
          std::swap(val[a], val[b]);
          std::swap(simplex[a], simplex[b]);
        }
    if (std::abs(val[0] - val[2]) < 1e-12 * (1.0 + std::abs(val[0]))) break;
    Pt centroid{0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])};
    auto combine = [&](double c) {
      return Pt{centroid[0] + c * (centroid[0] - simplex[2][0]),
                centroid[1] + c * (centroid[1] - simplex[2][1])};
    };
    Pt refl = combine(1.0);
    double frefl = eval(refl);
    if (frefl > val[0]) {
      Pt exp_ = combine(2.0);
      double fexp = eval(exp_);
      if (fexp > frefl) {
        simplex[2] = exp_;
        val[2] = fexp;
      } else {
        simplex[2] = refl;
        val[2] = frefl;
      }
    } else if (frefl > val[1]) {
      simplex[2] = refl;
      val[2] = frefl;
    } else {
      Pt contr = combine(-0.5);
      double fcontr = eval(contr);
      if (fcontr > val[2]) {
        simplex[2] = contr;
        val[2] = fcontr;
      } else {  // shrink toward the best vertex
        for (int a = 1; a < 3; ++a) {
          simplex[a] = {0.5 * (simplex[a][0] + simplex[0][0]),
                        0.5 * (simplex[a][1] + simplex[0][1])};
          val[a] = eval(simplex[a]);
        }
      }
    }
  }
  int best = 0;
  for (int a = 1; a < 3; ++a)
    if (val[a] > val[best]) best = a;
  return {simplex[best], val[best]};
}

}  // namespace detail

/// Maximum-likelihood fit of (alpha, theta) under the partition likelihood:
/// coarse grid (alpha step 0.01, theta log-spaced) then Nelder-Mead in
/// (alpha, log(theta+alpha)). Degenerate data (n < 2, or a likelihood that
/// keeps climbing toward the theta bracket edge) is an error, not a clamp.
inline FitResult fit_mle(const FrequencyCounts& data) {
  if (data.n() < 2)
    throw std::runtime_error("fit_mle: degenerate data, n must be >= 2 (likelihood is constant)");
  auto loglik = [&](double alpha, double theta) {
    if (!(alpha >= 0.0 && alpha < 1.0) || !(theta > -alpha))
      return -std::numeric_limits<double>::infinity();
    return eppf_log(Params(alpha, theta), data);
  };
  double best_ll = -std::numeric_limits<double>::infinity();
  double best_alpha = 0.0, best_theta = 1.0;
  for (int ai = 0; ai <= 99; ++ai) {
    double alpha = 0.01 * ai;
    for (int ti = 0; ti <= 120; ++ti) {
      // log-spaced theta+alpha over [1e-3, 1e6]
      double theta = std::pow(10.0, -3.0 + 9.0 * ti / 120.0) - alpha;
      double ll = loglik(alpha, theta);
      if (ll > best_ll) {
        best_ll = ll;
        best_alpha = alpha;
        best_theta = theta;
      }
    }
  }
  auto [pt, ll] = detail::nelder_mead_2d(
      [&](double a, double t) { return loglik(a, std::exp(t) - a); },
      {best_alpha, std::log(best_theta + best_alpha)}, 2000);
  FitResult out;
  out.alpha_hat = pt[0];
  out.theta_hat = std::exp(pt[1]) - pt[0];
  out.method = FitMethod::mle;
  out.log_likelihood = ll;
  if (out.theta_hat > 5e5)
    throw std::runtime_error("fit_mle: degenerate data, likelihood increases toward theta = inf");
  return out;
}

}  // namespace ep
