#include "repmix/model.hpp"

namespace repmix {

ModelContext make_rgrm_context(const Dataset& data, PriorConfig prior) {
  prior.validate();
  ModelContext mc;
  mc.data = &data;
  mc.g_eff = prior.resolved_g(data.n());
  mc.prior = prior;
  mc.beta_kind = BetaPriorKind::GPrior;
  mc.kernel = RepulsionKernel::mahalanobis(data.gram, mc.g_eff, prior.g0);
  mc.tag = "rgrm";
  return mc;
}

ModelContext make_rrm_context(const Dataset& data, PriorConfig prior) {
  prior.validate();
  ModelContext mc;
  mc.data = &data;
  mc.g_eff = prior.resolved_g(data.n());
  mc.prior = prior;
  mc.beta_kind = BetaPriorKind::Isotropic;
  mc.kernel = RepulsionKernel::euclidean(prior.g0);
  mc.tag = "rrm";
  return mc;
}

ModelContext make_mfm_context(const Dataset& data, PriorConfig prior) {
  prior.validate();
  ModelContext mc;
  mc.data = &data;
  mc.g_eff = prior.resolved_g(data.n());
  mc.prior = prior;
  mc.beta_kind = BetaPriorKind::Isotropic;
  mc.kernel = RepulsionKernel::none();
  mc.tag = "mfm";
  return mc;
}

GaussianConditional coef_conditional(const ModelContext& mc,
                                     const Eigen::MatrixXd& xtx_c,
                                     const Eigen::VectorXd& xty_c,
                                     double sigma2) {
  const int p = mc.data->p();
  Eigen::MatrixXd prec = xtx_c / sigma2;
  if (mc.beta_kind == BetaPriorKind::GPrior) {
    prec += mc.data->gram / (mc.g_eff * sigma2);
  } else {
    prec += Eigen::MatrixXd::Identity(p, p) / mc.prior.tau2;
  }
  GaussianConditional cond;
  cond.prec_chol = spd_cholesky(prec);
  Eigen::VectorXd rhs = xty_c / sigma2;
  // solve L L^T mean = rhs
  Eigen::VectorXd tmp = cond.prec_chol.triangularView<Eigen::Lower>().solve(rhs);
  cond.mean = cond.prec_chol.transpose().triangularView<Eigen::Upper>().solve(tmp);
  return cond;
}

}  // namespace repmix
