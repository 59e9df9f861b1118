#pragma once

#include <stdexcept>
#include <vector>

#include "ep/exact.hpp"
#include "ep/log_value.hpp"

namespace ep {

// Exact Stirling triangles, |s(n,k)| and S(n,k), cached up to n = 64. They
// only feed the falling-to-rising cross-check oracle, so the cap is plenty;
// anything larger is a usage error, not a missing feature.
inline constexpr int kStirlingMaxN = 64;

namespace detail {

inline const std::vector<std::vector<BigInt>>& stirling_first_table() {
  static const std::vector<std::vector<BigInt>> table = [] {
    std::vector<std::vector<BigInt>> t(kStirlingMaxN + 1);
    t[0] = {BigInt(1)};
    for (int n = 1; n <= kStirlingMaxN; ++n) {
      t[n].assign(n + 1, BigInt(0));
      for (int k = 1; k <= n; ++k) {
        t[n][k] = t[n - 1][k - 1];
        if (k < n) t[n][k] += BigInt(n - 1) * t[n - 1][k];
      }
    }
    return t;
  }();
  return table;
}

inline const std::vector<std::vector<BigInt>>& stirling_second_table() {
  static const std::vector<std::vector<BigInt>> table = [] {
    std::vector<std::vector<BigInt>> t(kStirlingMaxN + 1);
    t[0] = {BigInt(1)};
    for (int n = 1; n <= kStirlingMaxN; ++n) {
      t[n].assign(n + 1, BigInt(0));
      for (int k = 1; k <= n; ++k) {
        t[n][k] = t[n - 1][k - 1];
        if (k < n) t[n][k] += BigInt(k) * t[n - 1][k];
      }
    }
    return t;
  }();
  return table;
}

inline void check_stirling_args(int n, int k) {
  if (n < 0 || k < 0) throw std::domain_error("stirling: negative argument");
  if (n > kStirlingMaxN) throw std::domain_error("stirling: n exceeds exact table cap of 64");
}

}  // namespace detail

/// |s(n,k)|, unsigned Stirling number of the first kind. k > n yields 0.
inline BigInt stirling_first_unsigned(int n, int k) {
  detail::check_stirling_args(n, k);
  if (k > n) return BigInt(0);
  return detail::stirling_first_table()[n][k];
}

/// S(n,k), Stirling number of the second kind. k > n yields 0.
inline BigInt stirling_second(int n, int k) {
  detail::check_stirling_args(n, k);
  if (k > n) return BigInt(0);
  return detail::stirling_second_table()[n][k];
}

/// Converts falling factorial moments E[(Y)_[j]], j = 0..n, into rising
/// factorial moments E[(Y)_(r)], r = 0..n, through the double Stirling sum
/// (y)_(n) = sum_i sum_j |s(n,i)| S(i,j) (y)_[j]. Cross-check oracle only.
inline std::vector<LogValue> rising_from_falling(const std::vector<LogValue>& falling_moments,
                                                 int n) {
  if (n < 0 || falling_moments.size() < static_cast<size_t>(n) + 1)
    throw std::domain_error("rising_from_falling: need moments for orders 0..n");
  std::vector<LogValue> rising(n + 1);
  for (int r = 0; r <= n; ++r) {
    LogValue acc = LogValue::zero();
    for (int i = 0; i <= r; ++i)
      for (int j = 0; j <= i; ++j) {
        BigInt w = stirling_first_unsigned(r, i) * stirling_second(i, j);
        if (w == 0) continue;
        acc += to_log_value(w) * falling_moments[j];
      }
    rising[r] = acc;
  }
  return rising;
}

}  // namespace ep
