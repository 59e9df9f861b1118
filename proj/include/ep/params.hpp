#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace ep {

/// The (alpha, theta) pair of the two-parameter model, validated once at
/// construction: alpha in [0,1), theta > -alpha. theta == 0 is legal for
/// alpha > 0; ops that additionally need theta > 0 (the alpha = 0 sampler)
/// enforce that themselves.
class Params {
 public:
  Params(double alpha, double theta) : alpha_(alpha), theta_(theta) {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw std::domain_error("Params: alpha must lie in [0,1), got " + std::to_string(alpha));
    if (!(theta > -alpha))
      throw std::domain_error("Params: theta must exceed -alpha, got theta=" +
                              std::to_string(theta) + " alpha=" + std::to_string(alpha));
  }

  double alpha() const { return alpha_; }
  double theta() const { return theta_; }

  friend bool operator==(const Params& a, const Params& b) {
    return a.alpha_ == b.alpha_ && a.theta_ == b.theta_;
  }

 private:
  double alpha_;
  double theta_;
};

/// Partition summary {frequency l -> multiplicity m_l}. Absent key means
/// zero blocks of that size. n = sum l*m_l and k = sum m_l are maintained
/// incrementally so they always satisfy the defining identities.
class FrequencyCounts {
 public:
  FrequencyCounts() = default;

  explicit FrequencyCounts(const std::map<long, long>& counts) {
    for (auto [l, ml] : counts) add(l, ml);
  }

  FrequencyCounts(std::initializer_list<std::pair<long, long>> counts) {
    for (auto [l, ml] : counts) add(l, ml);
  }

  void add(long l, long multiplicity = 1) {
    if (l < 1) throw std::domain_error("FrequencyCounts: frequency must be >= 1");
    if (multiplicity == 0) return;
    if (multiplicity < 0) throw std::domain_error("FrequencyCounts: multiplicity must be >= 1");
    counts_[l] += multiplicity;
    n_ += l * multiplicity;
    k_ += multiplicity;
  }

  // move one block from size l to size l+1 (a block of size l received a draw)
  void grow_block(long l) {
    if (l >= 1) {
      auto it = counts_.find(l);
      if (it == counts_.end() || it->second < 1)
        throw std::logic_error("FrequencyCounts: no block of size " + std::to_string(l));
      if (--it->second == 0) counts_.erase(it);
      counts_[l + 1] += 1;
      n_ += 1;
    } else {  // l == 0: a brand-new block
      counts_[1] += 1;
      n_ += 1;
      k_ += 1;
    }
  }

  long multiplicity(long l) const {
    auto it = counts_.find(l);
    return it == counts_.end() ? 0 : it->second;
  }

  long n() const { return n_; }
  long k() const { return k_; }
  bool empty() const { return counts_.empty(); }
  const std::map<long, long>& counts() const { return counts_; }

  friend bool operator==(const FrequencyCounts& a, const FrequencyCounts& b) {
    return a.counts_ == b.counts_;
  }
  friend bool operator<(const FrequencyCounts& a, const FrequencyCounts& b) {
    return a.counts_ < b.counts_;
  }

 private:
  std::map<long, long> counts_;
  long n_ = 0;
  long k_ = 0;
};

}  // namespace ep
