#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "repmix/dataset.hpp"
#include "repmix/state.hpp"

namespace repmix {

// Optimal assignment: returns for each row the matched column (or -1),
// maximizing the total score.  Rows/columns beyond the smaller side stay
// unmatched.
std::vector<int> max_assignment(const Eigen::MatrixXd& score);

// Resolves label switching: the reference draw is the one whose partition
// agrees most with the mean co-assignment across draws; every draw is then
// matched to it by maximum-overlap assignment on the contingency table.
// Extra labels receive fresh ids.  Partition structure is untouched.
Draws relabel_draws(const Draws& draws);

// Majority label per observation across (relabeled) draws; ties break to the
// smallest label id.
std::vector<int> point_assignments(const Draws& draws);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

double purity(const std::vector<int>& pred, const std::vector<int>& truth);

// OLS refit within each estimated cluster; clusters with fewer than p + 1
// members fall back to a light ridge so the metric stays defined.
double rmse_posthoc(const Dataset& data, const std::vector<int>& z_hat);

// Variant using posterior-mean coefficients per (relabeled) label instead of
// the refit.
double rmse_draw_based(const Dataset& data, const Draws& relabeled,
                       const std::vector<int>& z_hat);

struct KHat {
  double mean = 0.0;
  int mode = 0;
};

// Occupied-count summary; draws carrying explicit weights use the effective
// count #{k : pi_k > threshold} instead.
KHat k_hat(const Draws& draws, double eff_threshold = 1e-3);

struct EvalReport {
  double ari = std::numeric_limits<double>::quiet_NaN();
  double purity = std::numeric_limits<double>::quiet_NaN();
  double k_hat_mean = 0.0;
  int k_hat_mode = 0;
  double rmse = 0.0;
  int n = 0;
  bool has_truth = false;
};

EvalReport evaluate(const Dataset& data, const Draws& relabeled,
                    const std::vector<int>* truth, double eff_threshold = 1e-3,
                    bool rmse_ols_refit = true);

}  // namespace repmix
