#pragma once

#include "repmix/dataset.hpp"
#include "repmix/sampler.hpp"
#include "repmix/state.hpp"

namespace repmix {

// Overfitted finite mixture with a small-mass symmetric Dirichlet on the
// weights; redundant components are emptied rather than removed.
struct SidConfig {
  int k_fit = 20;
  double alpha_total = 0.1;  // per-component concentration alpha_total / k_fit
  double tau2 = 1.0;
  double a0 = 4.0;
  double b0 = 4.0;
  double eff_threshold = 1e-3;

  void validate() const;
};

// Blocked Gibbs on the non-collapsed mixture: weights | z, z | rest,
// beta_k | rest (isotropic normal prior), sigma2_k | rest (untruncated
// inverse gamma).  Every retained draw carries the explicit weights.
Draws run_sid(const Dataset& data, const SidConfig& sid, const ChainConfig& cfg);

}  // namespace repmix
