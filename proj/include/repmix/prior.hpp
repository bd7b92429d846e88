#pragma once

#include <cstdint>

namespace repmix {

// Prior over the number of components.  Poisson is conditioned on K >= 1.
struct KPrior {
  enum class Kind { Poisson, PointMass };
  Kind kind = Kind::Poisson;
  double lambda = 1.0;
  int at = 1;

  double log_pmf(int k) const;
};

// Which coefficient prior a model uses: the design-scaled g-prior
// N(0, g sigma^2 (X^T X)^{-1}) or the isotropic N(0, tau^2 I).
enum class BetaPriorKind { GPrior, Isotropic };

enum class KWeightRule { Literal, General };

struct PriorConfig {
  double g = 0.0;  // g-prior scale; 0 means "use the sample size"
  double g0 = 1.0;
  double alpha = 1.0;
  double a0 = 4.0;
  double b0 = 4.0;
  double sigma2_lo = 1e-4;
  double sigma2_hi = 1e4;
  KPrior k_prior{};
  int k_max = 20;
  int zk_samples = 20000;
  int ztilde_samples = 2000;
  int m_window = 2;
  double tau2 = 1.0;
  int max_rejection_iters = 1000;
  KWeightRule k_weight = KWeightRule::Literal;

  double resolved_g(int n) const { return g > 0.0 ? g : static_cast<double>(n); }

  // Throws Error("config") on any violated constraint, including a K prior
  // that leaves more than 1% of its mass above k_max.
  void validate() const;
};

}  // namespace repmix
