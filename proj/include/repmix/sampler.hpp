#pragma once

#include <cstdint>
#include <vector>

#include "repmix/model.hpp"
#include "repmix/normalizer.hpp"
#include "repmix/vn.hpp"

namespace repmix {

struct ChainConfig {
  int n_iter = 2000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;

  enum class Init { SingleCluster, RandomClusters, Given };
  Init init = Init::SingleCluster;
  int init_k = 5;            // RandomClusters
  std::vector<int> init_z;   // Given

  void validate(int n) const;
};

// One pass of the blocked-collapsed sampler is
//   assignment_sweep -> sample_component_count -> variance_sweep
//   -> coefficient_sweep.
// All accept-reject steps resample until acceptance (exact draws from the
// h-tilted targets), capped at prior.max_rejection_iters with a diagnostic.

// Exact draw from the repulsion-tilted prior given the occupied components.
ComponentParams draw_auxiliary_component(const MixtureState& state,
                                         const ModelContext& mc,
                                         std::mt19937_64& rng,
                                         ChainDiagnostics& diag);

// Urn-style reassignment of every observation; previously instantiated empty
// components are dropped first (they belong to the collapsed representation
// only between the K step and the parameter sweeps).
void assignment_sweep(MixtureState& state, const ModelContext& mc, VnCache& vn,
                      std::mt19937_64& rng, ChainDiagnostics& diag);

// Samples K over the candidate window, instantiating K - occupied empty
// components from the untilted prior.  Returns the sampled K.
int sample_component_count(MixtureState& state, const ModelContext& mc,
                           const ZkTable& zk, std::mt19937_64& rng,
                           ChainDiagnostics& diag);

void variance_sweep(MixtureState& state, const ModelContext& mc,
                    std::mt19937_64& rng, ChainDiagnostics& diag);

void coefficient_sweep(MixtureState& state, const ModelContext& mc,
                       std::mt19937_64& rng, ChainDiagnostics& diag);

MixtureState init_state(const ModelContext& mc, const ChainConfig& cfg,
                        std::mt19937_64& rng, ChainDiagnostics& diag);

Draws run_chain(const Dataset& data, const PriorConfig& prior,
                const ModelContext& mc, const ChainConfig& cfg,
                const ZkTable& zk);

// The three mixture-of-finite-mixtures variants of the simulation study.
Draws run_rgrm(const Dataset& data, const PriorConfig& prior,
               const ChainConfig& cfg, const ZkTable& zk);
Draws run_rrm(const Dataset& data, const PriorConfig& prior,
              const ChainConfig& cfg, const ZkTable& zk);
Draws run_mfm(const Dataset& data, const PriorConfig& prior,
              const ChainConfig& cfg);

}  // namespace repmix
