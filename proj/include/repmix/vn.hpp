#pragma once

#include <cstdint>
#include <vector>

#include "repmix/prior.hpp"

namespace repmix {

// log V_n(t) = log sum_{K>=t} p_K(K) K!/(K-t)! Gamma(aK)/Gamma(aK+n),
// summed in log space until the running term drops below the partial sum by
// the tail tolerance while decreasing.  Throws Error("nonconvergence") after
// 10000 terms and Error("domain") when t is out of range.
double compute_log_vn(int t, int n, double alpha, const KPrior& k_prior,
                      double tol = 1e-15);

// Memo over t for one (n, alpha, k_prior); values are independent of query
// order.  Owned by a single chain.
class VnCache {
 public:
  VnCache() = default;
  VnCache(int n, double alpha, KPrior k_prior, double tol = 1e-15);

  double log_vn(int t);

  std::int64_t queries() const { return queries_; }
  std::int64_t hits() const { return hits_; }

 private:
  int n_ = 0;
  double alpha_ = 1.0;
  KPrior k_prior_{};
  double tol_ = 1e-15;
  std::vector<double> vals_;
  std::vector<char> have_;
  std::int64_t queries_ = 0;
  std::int64_t hits_ = 0;
};

}  // namespace repmix
