#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "repmix/model.hpp"

namespace repmix {

struct ZkEntry {
  double log_estimate = 0.0;
  double mc_std_error = 0.0;
  int n_samples = 0;
};

// Monte Carlo table of the prior normalizing constants.  K = 1 is implicit
// and exact (log 0); entries cover 2..k_max.
struct ZkTable {
  std::map<int, ZkEntry> entries;
  int k_max = 1;
  std::uint64_t seed = 0;
  std::uint64_t key_hash = 0;

  double log_zk(int k) const;
  double std_error(int k) const;
};

// Average of h over joint prior draws; each draw uses a counter-based
// substream of `seed` and the reduction order is fixed, so the estimate is
// reproducible under any parallel schedule.  Throws Error("underflow") when
// every sampled h is zero.
ZkEntry estimate_zk(int k, const Dataset& data, const PriorConfig& prior,
                    BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                    std::uint64_t seed);

ZkTable build_zk_table(const Dataset& data, const PriorConfig& prior,
                       BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                       std::uint64_t seed);

// Posterior-side constant for the K step: occupied clusters draw from their
// variance/coefficient full conditionals (no repulsion accept-reject), the
// K - occupied empty slots draw from the untilted prior.
double estimate_ztilde(const MixtureState& state, const Dataset& data,
                       const PriorConfig& prior, BetaPriorKind beta_kind,
                       const RepulsionKernel& kernel, int k, std::uint64_t seed);

struct Theorem1Diagnostic {
  double c1_hat = 0.0;
  std::vector<std::pair<int, double>> per_k_ratios;  // (K, -log Z_K / K)
  bool bound_ok = true;
  int violations = 0;
};

// Checks the linear-in-K normalizing bound: every -log Z_K must be
// nonnegative within twice its MC standard error.
Theorem1Diagnostic theorem1_diagnostic(const ZkTable& table);

std::uint64_t zk_key_hash(const Dataset& data, const PriorConfig& prior,
                          BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                          std::uint64_t seed);

void save_zk_table(const std::string& path, const ZkTable& table,
                   const Theorem1Diagnostic* diag);
// Returns false when the file is absent or keyed by a different hash.
bool load_zk_table(const std::string& path, std::uint64_t expect_hash,
                   ZkTable* out);

}  // namespace repmix
