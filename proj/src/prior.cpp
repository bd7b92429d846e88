#include "repmix/prior.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "repmix/error.hpp"

namespace repmix {

double KPrior::log_pmf(int k) const {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (k < 1) return ninf;
  switch (kind) {
    case Kind::Poisson:
      return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0) -
             std::log1p(-std::exp(-lambda));
    case Kind::PointMass:
      return k == at ? 0.0 : ninf;
  }
  return ninf;
}

void PriorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error("config", msg); };
  if (g < 0.0) fail("g must be positive (or 0 for auto)");
  if (g0 < 0.0) fail("g0 must be nonnegative");
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (!(a0 > 0.0) || !(b0 > 0.0)) fail("a0, b0 must be positive");
  if (!(sigma2_lo > 0.0)) fail("sigma2_lo must be positive");
  if (!(sigma2_lo < sigma2_hi)) fail("sigma2_lo must be below sigma2_hi");
  if (k_max < 1) fail("k_max must be positive");
  if (zk_samples < 1) fail("zk_samples must be positive");
  if (ztilde_samples < 1) fail("ztilde_samples must be positive");
  if (m_window < 0) fail("m_window must be nonnegative");
  if (!(tau2 > 0.0)) fail("tau2 must be positive");
  if (max_rejection_iters < 1) fail("max_rejection_iters must be positive");
  if (k_prior.kind == KPrior::Kind::Poisson && !(k_prior.lambda > 0.0)) {
    fail("k prior lambda must be positive");
  }
  double mass = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const double lp = k_prior.log_pmf(k);
    if (std::isnan(lp) || lp > 0.0) fail("k prior pmf invalid at K=" + std::to_string(k));
    mass += std::exp(lp);
  }
  // k_max = 1 is the degenerate exact-Z_1 table and always allowed
  if (k_max > 1 && mass < 0.99) {
    fail("k prior leaves mass " + std::to_string(1.0 - mass) + " above k_max");
  }
}

}  // namespace repmix
