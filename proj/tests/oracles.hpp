#pragma once

// Test-side oracles: everything here reduces expectations to exhaustive
// enumeration (exact small-n partition distributions and conditional draw
// trees), never to the closed-form expressions under test.

#include <cmath>
#include <vector>

#include "ep/partition.hpp"

namespace oracle {

inline double rising_int(double x, long r) {
  double v = 1;
  for (long t = 0; t < r; ++t) v *= (x + static_cast<double>(t));
  return v;
}

// E[(M_{l,n})_(r)] by summing over all partition shapes of n
inline double moment_M(const ep::Params& p, long n, long l, long r) {
  double acc = 0;
  for (auto& [shape, prob] : ep::enumerate_distribution(p, n))
    acc += prob * rising_int(static_cast<double>(shape.multiplicity(l)), r);
  return acc;
}

// E[(1-y)^(-M_{l,n})] by enumeration
inline double mgf_M(const ep::Params& p, long n, long l, double y) {
  double acc = 0;
  for (auto& [shape, prob] : ep::enumerate_distribution(p, n))
    acc += prob * std::pow(1.0 - y, -static_cast<double>(shape.multiplicity(l)));
  return acc;
}

// E[(N_{l,m}^{(n)})_(r) | initial blocks] by enumerating all draw sequences
inline double cond_moment_N(const ep::Params& p, const std::vector<long>& sizes, long m, long l,
                            long r) {
  double acc = 0;
  ep::enumerate_conditional(p, sizes, m, [&](const ep::ConditionalState& st, double prob) {
    long Nl = 0;
    for (long s : st.new_block_sizes)
      if (s == l) ++Nl;
    acc += prob * rising_int(static_cast<double>(Nl), r);
  });
  return acc;
}

// P[M_{l,m}^(n)/m >= x | initial blocks] by enumeration
inline double cond_tail(const ep::Params& p, const std::vector<long>& sizes, long m, long l,
                        double x) {
  double acc = 0;
  ep::enumerate_conditional(p, sizes, m, [&](const ep::ConditionalState& st, double prob) {
    auto tot = st.total_counts();
    long Ml = tot.count(l) ? tot.at(l) : 0;
    if (static_cast<double>(Ml) >= x * static_cast<double>(m)) acc += prob;
  });
  return acc;
}

// P[K_m^(n) = k | initial blocks] by enumeration, k = 0..m
inline std::vector<double> cond_K_pmf(const ep::Params& p, const std::vector<long>& sizes,
                                      long m) {
  std::vector<double> pmf(m + 1, 0.0);
  ep::enumerate_conditional(p, sizes, m, [&](const ep::ConditionalState& st, double prob) {
    pmf[st.new_block_count()] += prob;
  });
  return pmf;
}

// the (alpha, theta) grid used across the oracle sweeps
inline std::vector<ep::Params> standard_grid() {
  std::vector<ep::Params> g;
  for (double alpha : {0.0, 0.25, 0.5, 0.75})
    for (double theta : {-0.1, 0.5, 1.0, 10.0})
      if (theta > -alpha) g.emplace_back(alpha, theta);
  return g;
}

}  // namespace oracle
