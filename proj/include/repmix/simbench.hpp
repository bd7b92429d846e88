#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repmix/dataset.hpp"
#include "repmix/metrics.hpp"
#include "repmix/sampler.hpp"
#include "repmix/sid.hpp"

namespace repmix {

// Simulation designs: "toy" is the three-line illustration (intercept plus
// one uniform covariate), "s1".."s3" the four-cluster Gaussian designs.
struct ScenarioSpec {
  std::string id = "s1";
  int n_per = 25;  // ignored by "toy", which fixes 1000 per cluster
  std::uint64_t seed = 0;
};

struct GeneratedData {
  Dataset data;
  std::vector<int> truth;      // 1-based cluster labels, block layout
  Eigen::MatrixXd coefficients;  // k_true x p
};

GeneratedData gen_scenario(const ScenarioSpec& spec);

bool known_scenario(const std::string& id);

struct BenchConfig {
  std::vector<std::string> scenarios{"s1"};
  std::vector<int> n_pers{50};
  std::vector<std::string> methods{"rgrm", "rrm", "mfm", "sid1", "sid2"};
  int reps = 20;
  std::uint64_t base_seed = 1;
  int jobs = 1;
  PriorConfig prior;
  ChainConfig chain;
  SidConfig sid1;
  SidConfig sid2;
  bool rmse_ols_refit = true;
};

struct RepRow {
  std::string scenario;
  int n = 0;
  std::string method;
  int rep = 0;
  std::uint64_t seed = 0;
  EvalReport report;
  bool failed = false;
  std::string error;
};

struct BenchCell {
  std::string scenario;
  int n = 0;
  std::string method;
  int reps_ok = 0;
  int reps_failed = 0;
  double ari_mean = 0.0, ari_se = 0.0;
  double rmse_mean = 0.0, rmse_se = 0.0;
  double khat_mean = 0.0, khat_se = 0.0;
  double purity_mean = 0.0, purity_se = 0.0;
  bool valid = true;  // false when more than 10% of replicates failed
};

struct BenchResult {
  std::vector<BenchCell> cells;
  std::vector<RepRow> rows;
  bool all_valid = true;
};

std::uint64_t replicate_seed(std::uint64_t base_seed, const std::string& scenario,
                             const std::string& method, int replicate);

BenchResult run_benchmark(const BenchConfig& cfg);

void save_bench_csv(const std::string& path, const BenchResult& result);
void save_bench_json(const std::string& path, const BenchResult& result);

// Pairwise distances of a coefficient set in plain beta space versus the
// design-induced metric, plus the number of discordant pair orderings.
struct GeometryReport {
  std::vector<std::pair<int, int>> pairs;  // lexicographic (k, k')
  std::vector<double> beta_space_dists;
  std::vector<double> mean_space_dists;
  int ordering_flips = 0;
};

GeometryReport geometry_report(const Dataset& data,
                               const std::vector<Eigen::VectorXd>& betas,
                               double g);

}  // namespace repmix
