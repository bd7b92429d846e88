#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace repmix {

// Design matrix and response with cached Gram factorizations.  X^T X must
// be strictly positive definite; construction fails otherwise.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::MatrixXd gram;       // X^T X, symmetrized
  Eigen::MatrixXd gram_chol;  // lower-triangular L with L L^T = gram
  Eigen::MatrixXd gram_inv;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

Dataset build_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// SPD Cholesky with a relative pivot floor of 1e-12 * trace(m)/p; throws
// Error("singular") when a pivot falls below it.
Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& m);

// CSV with header x1..xp,y[,z_true]; strict parsing, missing values rejected.
struct LoadedCsv {
  Dataset data;
  std::optional<std::vector<int>> z_true;
};

LoadedCsv load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const std::vector<int>* z_true);

// Shortest-round-trip decimal form used by every text output.
std::string format_double(double v);

}  // namespace repmix
