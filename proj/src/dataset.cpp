#include "repmix/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "repmix/error.hpp"

namespace repmix {

Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& m) {
  const int p = static_cast<int>(m.rows());
  if (m.cols() != p) throw Error("dim", "cholesky: matrix not square");
  const double floor = 1e-12 * m.trace() / p;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double d = m(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > floor)) {
      throw Error("singular", "cholesky: pivot " + std::to_string(d) +
                                  " at column " + std::to_string(j) +
                                  " below floor " + std::to_string(floor));
    }
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < p; ++i) {
      const double s = m(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

Dataset build_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) {
    throw Error("dim", "build_dataset: X has " + std::to_string(X.rows()) +
                           " rows but y has " + std::to_string(y.size()));
  }
  if (X.rows() < 1 || X.cols() < 1) {
    throw Error("dim", "build_dataset: empty design");
  }
  Dataset d;
  d.X = X;
  d.y = y;
  Eigen::MatrixXd g = X.transpose() * X;
  d.gram = 0.5 * (g + g.transpose());
  d.gram_chol = spd_cholesky(d.gram);
  // inv = L^{-T} L^{-1}
  Eigen::MatrixXd linv = d.gram_chol.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(d.p(), d.p()));
  d.gram_inv = linv.transpose() * linv;
  const double dev =
      (d.gram_inv * d.gram - Eigen::MatrixXd::Identity(d.p(), d.p()))
          .cwiseAbs()
          .maxCoeff();
  if (!(dev < 1e-8)) {
    throw Error("singular",
                "build_dataset: inverse check failed, max deviation " +
                    std::to_string(dev));
  }
  return d;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_value(const std::string& tok, int row, int col) {
  if (tok.empty()) {
    throw Error("io", "csv: missing value at row " + std::to_string(row) +
                          " column " + std::to_string(col));
  }
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
    throw Error("io", "csv: bad value '" + tok + "' at row " +
                          std::to_string(row));
  }
  return v;
}

}  // namespace

LoadedCsv load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("io", "empty csv: " + path);
  const auto header = split_line(line);
  int p = 0;
  while (p < static_cast<int>(header.size()) &&
         header[p] == "x" + std::to_string(p + 1)) {
    ++p;
  }
  if (p == 0) throw Error("io", "csv header must start with x1..xp: " + path);
  if (p >= static_cast<int>(header.size()) || header[p] != "y") {
    throw Error("io", "csv header missing y column: " + path);
  }
  bool has_truth = false;
  if (static_cast<int>(header.size()) == p + 2 && header[p + 1] == "z_true") {
    has_truth = true;
  } else if (static_cast<int>(header.size()) != p + 1) {
    throw Error("io", "csv header has unexpected columns: " + path);
  }

  std::vector<std::vector<double>> xrows;
  std::vector<double> ys;
  std::vector<int> zs;
  int row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto toks = split_line(line);
    if (static_cast<int>(toks.size()) != static_cast<int>(header.size())) {
      throw Error("io", "csv: row " + std::to_string(row) + " has " +
                            std::to_string(toks.size()) + " fields");
    }
    std::vector<double> xr(p);
    for (int j = 0; j < p; ++j) xr[j] = parse_value(toks[j], row, j);
    xrows.push_back(std::move(xr));
    ys.push_back(parse_value(toks[p], row, p));
    if (has_truth) {
      const double zv = parse_value(toks[p + 1], row, p + 1);
      if (zv != std::floor(zv)) {
        throw Error("io", "csv: z_true not integer at row " + std::to_string(row));
      }
      zs.push_back(static_cast<int>(zv));
    }
    ++row;
  }
  const int n = static_cast<int>(xrows.size());
  if (n == 0) throw Error("io", "csv has no data rows: " + path);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = xrows[i][j];
    y(i) = ys[i];
  }
  LoadedCsv out{build_dataset(X, y), std::nullopt};
  if (has_truth) out.z_true = std::move(zs);
  return out;
}

void save_dataset_csv(const std::string& path, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const std::vector<int>* z_true) {
  if (X.rows() != y.size()) throw Error("dim", "save csv: X/y mismatch");
  if (z_true && static_cast<int>(z_true->size()) != X.rows()) {
    throw Error("dim", "save csv: z_true length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  for (int j = 0; j < X.cols(); ++j) out << "x" << (j + 1) << ",";
  out << "y";
  if (z_true) out << ",z_true";
  out << "\n";
  for (int i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < X.cols(); ++j) out << format_double(X(i, j)) << ",";
    out << format_double(y(i));
    if (z_true) out << "," << (*z_true)[i];
    out << "\n";
  }
  if (!out) throw Error("io", "write failed: " + path);
}

}  // namespace repmix
