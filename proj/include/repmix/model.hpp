#pragma once

#include <Eigen/Dense>
#include <string>

#include "repmix/dataset.hpp"
#include "repmix/error.hpp"
#include "repmix/prior.hpp"
#include "repmix/repulsion.hpp"
#include "repmix/rng.hpp"
#include "repmix/state.hpp"

namespace repmix {

// Everything a sweep needs to know about the model being sampled: the data,
// the resolved hyperparameters, the coefficient prior and the repulsion
// kernel.  The same machinery serves the g-prior model and the two
// baselines via kernel/prior substitution.
struct ModelContext {
  const Dataset* data = nullptr;
  PriorConfig prior;
  BetaPriorKind beta_kind = BetaPriorKind::GPrior;
  RepulsionKernel kernel;
  std::string tag;
  double g_eff = 1.0;
};

ModelContext make_rgrm_context(const Dataset& data, PriorConfig prior);
ModelContext make_rrm_context(const Dataset& data, PriorConfig prior);
ModelContext make_mfm_context(const Dataset& data, PriorConfig prior);

template <class G>
double draw_prior_sigma2(const ModelContext& mc, G& rng, bool* clamped = nullptr) {
  return rtrunc_invgamma(rng, mc.prior.a0, mc.prior.b0, mc.prior.sigma2_lo,
                         mc.prior.sigma2_hi, clamped);
}

// beta | sigma2 from the untilted coefficient prior.
template <class G>
Eigen::VectorXd draw_prior_beta(const ModelContext& mc, double sigma2, G& rng) {
  const int p = mc.data->p();
  Eigen::VectorXd zv(p);
  for (int j = 0; j < p; ++j) zv(j) = rnorm(rng);
  if (mc.beta_kind == BetaPriorKind::Isotropic) {
    return std::sqrt(mc.prior.tau2) * zv;
  }
  // N(0, g sigma^2 (X^T X)^{-1}): sqrt(g sigma^2) L^{-T} z with gram = L L^T
  Eigen::VectorXd w = mc.data->gram_chol.transpose()
                          .triangularView<Eigen::Upper>()
                          .solve(zv);
  return std::sqrt(mc.g_eff * sigma2) * w;
}

template <class G>
ComponentParams draw_prior_component(const ModelContext& mc, G& rng,
                                     bool* clamped = nullptr) {
  ComponentParams c;
  c.sigma2 = draw_prior_sigma2(mc, rng, clamped);
  c.beta = draw_prior_beta(mc, c.sigma2, rng);
  return c;
}

// Gaussian full conditional N(V m, V) held as the Cholesky factor of the
// precision, so repeated draws inside an accept-reject loop are cheap.
struct GaussianConditional {
  Eigen::MatrixXd prec_chol;  // lower L with L L^T = V^{-1}
  Eigen::VectorXd mean;

  template <class G>
  Eigen::VectorXd draw(G& rng) const {
    const int p = static_cast<int>(mean.size());
    Eigen::VectorXd zv(p);
    for (int j = 0; j < p; ++j) zv(j) = rnorm(rng);
    Eigen::VectorXd w =
        prec_chol.transpose().triangularView<Eigen::Upper>().solve(zv);
    return mean + w;
  }
};

// Conditional for an occupied cluster given its sufficient statistics
// X_c^T X_c and X_c^T y_c:  V = (X_c^T X_c / s2 + prior precision)^{-1},
// m = X_c^T y_c / s2.
GaussianConditional coef_conditional(const ModelContext& mc,
                                     const Eigen::MatrixXd& xtx_c,
                                     const Eigen::VectorXd& xty_c,
                                     double sigma2);

}  // namespace repmix
