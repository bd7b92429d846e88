#pragma once

#include <Eigen/Dense>
#include <vector>

#include "repmix/dataset.hpp"

namespace repmix {

enum class KernelKind { Mahalanobis, Euclidean, None };

// Pairwise repulsion h = min over pairs of G(d(b, b')), with
// G(t) = t / (t + g0) and d the kernel's squared distance.  The
// Mahalanobis kernel measures d = (1/g) (b-b')^T (X^T X) (b-b'), the metric
// under which the g-prior whitens to an isotropic normal.
struct RepulsionKernel {
  KernelKind kind = KernelKind::None;
  double g0 = 0.0;
  Eigen::MatrixXd metric;  // Mahalanobis only: X^T X
  double g = 1.0;          // Mahalanobis only

  static RepulsionKernel mahalanobis(const Eigen::MatrixXd& gram, double g, double g0);
  static RepulsionKernel euclidean(double g0);
  static RepulsionKernel none();

  // -1 when any dimension is accepted.
  int dim() const { return kind == KernelKind::Mahalanobis ? static_cast<int>(metric.rows()) : -1; }

  // h is identically 1: no kernel, or the g0 = 0 limit.  Callers skip the
  // accept-reject and Monte Carlo machinery entirely, which makes g0 = 0
  // trajectory-identical to the non-repulsive model.
  bool trivial() const { return kind == KernelKind::None || g0 == 0.0; }
};

// G(t) = t/(t+g0) for g0 > 0; the g0 = 0 limit degenerates to the constant 1
// so a single code path covers the non-repulsive model.
double repulsion_g(double t, double g0);

double pair_distance(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                     const RepulsionKernel& kernel);

// min over unordered pairs of repulsion_g(pair_distance); 1 for fewer than
// two vectors or kernel None.
double repulsion_h(const std::vector<Eigen::VectorXd>& betas, const RepulsionKernel& kernel);

// eta = g^{-1/2} L^T beta with gram = L L^T, so squared whitened distances
// equal the Mahalanobis pair_distance.
Eigen::VectorXd whiten(const Eigen::VectorXd& beta, const Dataset& data, double g);

}  // namespace repmix
