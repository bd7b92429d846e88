#include "repmix/repulsion.hpp"

#include <cmath>
#include <string>

#include "repmix/error.hpp"

namespace repmix {

RepulsionKernel RepulsionKernel::mahalanobis(const Eigen::MatrixXd& gram,
                                             double g, double g0) {
  if (gram.rows() != gram.cols() || gram.rows() < 1) {
    throw Error("dim", "mahalanobis kernel: metric must be square");
  }
  if (!(g > 0.0)) throw Error("domain", "mahalanobis kernel: g must be positive");
  if (g0 < 0.0) throw Error("domain", "kernel: g0 must be nonnegative");
  RepulsionKernel k;
  k.kind = KernelKind::Mahalanobis;
  k.g0 = g0;
  k.metric = gram;
  k.g = g;
  return k;
}

RepulsionKernel RepulsionKernel::euclidean(double g0) {
  if (g0 < 0.0) throw Error("domain", "kernel: g0 must be nonnegative");
  RepulsionKernel k;
  k.kind = KernelKind::Euclidean;
  k.g0 = g0;
  return k;
}

RepulsionKernel RepulsionKernel::none() { return RepulsionKernel{}; }

double repulsion_g(double t, double g0) {
  if (t < 0.0) throw Error("domain", "repulsion_g: negative distance");
  if (g0 < 0.0) throw Error("domain", "repulsion_g: negative g0");
  if (g0 == 0.0) return 1.0;
  return t / (t + g0);
}

double pair_distance(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                     const RepulsionKernel& kernel) {
  if (b1.size() != b2.size()) {
    throw Error("dim", "pair_distance: vector lengths differ");
  }
  switch (kernel.kind) {
    case KernelKind::Mahalanobis: {
      if (b1.size() != kernel.metric.rows()) {
        throw Error("dim", "pair_distance: vector length " +
                               std::to_string(b1.size()) +
                               " does not match kernel dimension");
      }
      const Eigen::VectorXd d = b1 - b2;
      return d.dot(kernel.metric * d) / kernel.g;
    }
    case KernelKind::Euclidean:
      return (b1 - b2).squaredNorm();
    case KernelKind::None:
      return 0.0;
  }
  return 0.0;
}

double repulsion_h(const std::vector<Eigen::VectorXd>& betas,
                   const RepulsionKernel& kernel) {
  if (kernel.kind == KernelKind::None) return 1.0;
  const int m = static_cast<int>(betas.size());
  double h = 1.0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      h = std::min(h, repulsion_g(pair_distance(betas[a], betas[b], kernel),
                                  kernel.g0));
      if (h == 0.0) return 0.0;
    }
  }
  return h;
}

Eigen::VectorXd whiten(const Eigen::VectorXd& beta, const Dataset& data, double g) {
  if (beta.size() != data.p()) {
    throw Error("dim", "whiten: beta length does not match dataset");
  }
  if (!(g > 0.0)) throw Error("domain", "whiten: g must be positive");
  return (data.gram_chol.transpose() * beta) / std::sqrt(g);
}

}  // namespace repmix
