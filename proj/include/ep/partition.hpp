#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "ep/exact.hpp"
#include "ep/params.hpp"
#include "ep/rng.hpp"
#include "ep/special.hpp"

namespace ep {

/// log EPPF of a partition shape: log of one labeled partition's probability
///   prod_{i=0}^{j-1}(theta+i*alpha) / (theta)_(n) * prod_b (1-alpha)_(n_b - 1).
/// The leading theta cancels against (theta)_(n) = theta*(theta+1)_(n-1), which
/// keeps theta = 0 (and theta -> 0) finite.
inline double eppf_log(const Params& params, const FrequencyCounts& part) {
  if (part.empty()) throw std::domain_error("eppf_log: empty partition");
  const double alpha = params.alpha();
  const double theta = params.theta();
  const long n = part.n();
  const long j = part.k();
  double lp = 0.0;
  for (long i = 1; i < j; ++i) lp += std::log(theta + static_cast<double>(i) * alpha);
  lp -= log_rising(theta + 1.0, static_cast<double>(n - 1));
  for (auto [l, ml] : part.counts())
    if (l > 1) lp += static_cast<double>(ml) * log_rising(1.0 - alpha, static_cast<double>(l - 1));
  return lp;
}

/// Full bookkeeping of an additional sample of size m continued from an
/// initial partition with block sizes n_1..n_j:
///   new_block_sizes[i] = S_i, old_increments[b] = R_b,
///   sum S_i + sum R_b = m.
struct ConditionalState {
  std::vector<long> initial_sizes;
  long m = 0;
  std::vector<long> new_block_sizes;  // S_i, insertion order
  std::vector<long> old_increments;   // R_b, aligned with initial_sizes

  long new_element_count() const {  // L_m^(n)
    long s = 0;
    for (long v : new_block_sizes) s += v;
    return s;
  }
  long new_block_count() const { return static_cast<long>(new_block_sizes.size()); }

  // N_l: new blocks of size l
  std::map<long, long> new_counts() const {
    std::map<long, long> c;
    for (long v : new_block_sizes) c[v] += 1;
    return c;
  }
  // O_l: old blocks whose total size n_b + R_b equals l
  std::map<long, long> old_counts() const {
    std::map<long, long> c;
    for (size_t b = 0; b < initial_sizes.size(); ++b) c[initial_sizes[b] + old_increments[b]] += 1;
    return c;
  }
  // M_l = O_l + N_l
  std::map<long, long> total_counts() const {
    std::map<long, long> c = old_counts();
    for (auto [l, v] : new_counts()) c[l] += v;
    return c;
  }
};

namespace detail {

// One predictive-rule draw applied to (old blocks + new blocks).
inline void predictive_step(const Params& params, std::vector<long>& old_sizes,
                            std::vector<long>& old_incr, std::vector<long>& new_sizes,
                            long& total, Xoshiro256& rng) {
  const double alpha = params.alpha();
  const double theta = params.theta();
  const long j = static_cast<long>(old_sizes.size() + new_sizes.size());
  if (total == 0 && j == 0) {  // first draw founds a block with probability one
    new_sizes.push_back(1);
    ++total;
    return;
  }
  double u = rng.uniform() * (theta + static_cast<double>(total));
  double p_new = theta + static_cast<double>(j) * alpha;
  if (u < p_new) {
    new_sizes.push_back(1);
  } else {
    u -= p_new;
    bool placed = false;
    for (size_t b = 0; b < old_sizes.size() && !placed; ++b) {
      double w = static_cast<double>(old_sizes[b] + old_incr[b]) - alpha;
      if (u < w) {
        ++old_incr[b];
        placed = true;
      } else {
        u -= w;
      }
    }
    for (size_t b = 0; b < new_sizes.size() && !placed; ++b) {
      double w = static_cast<double>(new_sizes[b]) - alpha;
      if (u < w) {
        ++new_sizes[b];
        placed = true;
      } else {
        u -= w;
      }
    }
    if (!placed) {  // u ran past the last weight by rounding: take the last block
      if (!new_sizes.empty())
        ++new_sizes.back();
      else
        ++old_incr.back();
    }
  }
  ++total;
}

}  // namespace detail

/// Continues the sampling model from an initial partition for m more draws.
inline ConditionalState sample_conditional(const Params& params,
                                           const std::vector<long>& initial_sizes, long m,
                                           Xoshiro256& rng) {
  if (m < 0) throw std::domain_error("sample_conditional: m must be >= 0");
  long total = 0;
  for (long s : initial_sizes) {
    if (s < 1) throw std::domain_error("sample_conditional: block sizes must be >= 1");
    total += s;
  }
  ConditionalState st;
  st.initial_sizes = initial_sizes;
  st.m = m;
  st.old_increments.assign(initial_sizes.size(), 0);
  std::vector<long> old_sizes = initial_sizes;
  for (long step = 0; step < m; ++step)
    detail::predictive_step(params, old_sizes, st.old_increments, st.new_block_sizes, total, rng);
  return st;
}

/// Draws one partition of n by n applications of the predictive rule.
/// Identical to sample_conditional from an empty initial state.
inline FrequencyCounts sample_partition(const Params& params, long n, Xoshiro256& rng) {
  if (n < 1) throw std::domain_error("sample_partition: n must be >= 1");
  ConditionalState st = sample_conditional(params, {}, n, rng);
  FrequencyCounts fc;
  for (auto [l, ml] : st.new_counts()) fc.add(l, ml);
  return fc;
}

inline constexpr long kEnumerationMaxN = 9;

/// Exact distribution over partition shapes of n: EPPF times the number of
/// set partitions with that shape, n! / (prod_l l!^{m_l} m_l!), the latter in
/// exact integers. Brute-force oracle; n is capped at 9.
inline std::map<FrequencyCounts, double> enumerate_distribution(const Params& params, long n) {
  if (n < 1 || n > kEnumerationMaxN)
    throw std::domain_error("enumerate_distribution: n must lie in [1, 9]");
  std::map<FrequencyCounts, double> out;
  std::map<long, long> shape;
  // integer partitions of n, largest part first
  std::function<void(long, long)> rec = [&](long remaining, long max_part) {
    if (remaining == 0) {
      FrequencyCounts fc(shape);
      BigInt ways = bigint_factorial(static_cast<unsigned long>(n));
      for (auto [l, ml] : shape) {
        BigInt lf = bigint_factorial(static_cast<unsigned long>(l));
        for (long t = 0; t < ml; ++t) ways /= lf;
        ways /= bigint_factorial(static_cast<unsigned long>(ml));
      }
      out[fc] = std::exp(eppf_log(params, fc)) * ways.get_d();
      return;
    }
    for (long l = std::min(remaining, max_part); l >= 1; --l) {
      shape[l] += 1;
      rec(remaining - l, l);
      if (--shape[l] == 0) shape.erase(l);
    }
  };
  rec(n, n);
  return out;
}

/// Visits every trajectory of m additional draws from the given initial
/// blocks, with its exact probability under the predictive rule. The oracle
/// counterpart of sample_conditional; cost grows like (j+m)^m.
inline void enumerate_conditional(const Params& params, const std::vector<long>& initial_sizes,
                                  long m,
                                  const std::function<void(const ConditionalState&, double)>& visit) {
  if (m < 0 || m > 8) throw std::domain_error("enumerate_conditional: m must lie in [0, 8]");
  const double alpha = params.alpha();
  const double theta = params.theta();
  long n0 = 0;
  for (long s : initial_sizes) n0 += s;
  ConditionalState st;
  st.initial_sizes = initial_sizes;
  st.m = m;
  st.old_increments.assign(initial_sizes.size(), 0);
  std::function<void(long, double)> rec = [&](long step, double prob) {
    if (step == m) {
      visit(st, prob);
      return;
    }
    const long total = n0 + step;
    const long j = static_cast<long>(initial_sizes.size() + st.new_block_sizes.size());
    const double denom = theta + static_cast<double>(total);
    if (total == 0 && j == 0) {
      st.new_block_sizes.push_back(1);
      rec(step + 1, prob);
      st.new_block_sizes.pop_back();
      return;
    }
    double p_new = (theta + static_cast<double>(j) * alpha) / denom;
    if (p_new > 0) {
      st.new_block_sizes.push_back(1);
      rec(step + 1, prob * p_new);
      st.new_block_sizes.pop_back();
    }
    for (size_t b = 0; b < initial_sizes.size(); ++b) {
      double w = (static_cast<double>(initial_sizes[b] + st.old_increments[b]) - alpha) / denom;
      ++st.old_increments[b];
      rec(step + 1, prob * w);
      --st.old_increments[b];
    }
    for (size_t b = 0; b < st.new_block_sizes.size(); ++b) {
      double w = (static_cast<double>(st.new_block_sizes[b]) - alpha) / denom;
      ++st.new_block_sizes[b];
      rec(step + 1, prob * w);
      --st.new_block_sizes[b];
    }
  };
  rec(0, 1.0);
}

}  // namespace ep
