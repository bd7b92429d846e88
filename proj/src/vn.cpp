#include "repmix/vn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "repmix/error.hpp"
#include "repmix/rng.hpp"

namespace repmix {

double compute_log_vn(int t, int n, double alpha, const KPrior& k_prior,
                      double tol) {
  if (t < 1) throw Error("domain", "compute_log_vn: t must be >= 1");
  if (t > n + 1) {
    throw Error("domain", "compute_log_vn: t = " + std::to_string(t) +
                              " exceeds n + 1 = " + std::to_string(n + 1));
  }
  if (!(tol > 0.0) || tol >= 1.0) throw Error("domain", "compute_log_vn: bad tol");
  const double ninf = -std::numeric_limits<double>::infinity();
  const double log_tol = std::log(tol);
  double log_sum = ninf;
  double prev_term = std::numeric_limits<double>::infinity();
  for (int k = t; k < t + 10000; ++k) {
    const double term = k_prior.log_pmf(k) + std::lgamma(k + 1.0) -
                        std::lgamma(k - t + 1.0) + std::lgamma(alpha * k) -
                        std::lgamma(alpha * k + n);
    log_sum = logaddexp(log_sum, term);
    if (term <= prev_term && term < log_sum + log_tol) return log_sum;
    prev_term = term;
  }
  throw Error("nonconvergence",
              "compute_log_vn: series did not settle after 10000 terms (t=" +
                  std::to_string(t) + ", n=" + std::to_string(n) + ")");
}

VnCache::VnCache(int n, double alpha, KPrior k_prior, double tol)
    : n_(n), alpha_(alpha), k_prior_(k_prior), tol_(tol),
      vals_(n + 2, 0.0), have_(n + 2, 0) {}

double VnCache::log_vn(int t) {
  ++queries_;
  if (t < 1 || t > n_ + 1) {
    throw Error("domain", "VnCache: t out of range");
  }
  if (have_[t]) {
    ++hits_;
    return vals_[t];
  }
  vals_[t] = compute_log_vn(t, n_, alpha_, k_prior_, tol_);
  have_[t] = 1;
  return vals_[t];
}

}  // namespace repmix
