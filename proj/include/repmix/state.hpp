#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "repmix/prior.hpp"

namespace repmix {

struct ComponentParams {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

// Assignments plus component slots.  Ids are small integers; freed slots are
// reused smallest-first so relabeling stays deterministic.  A live component
// with no assigned observations is "empty" (instantiated by the K step).
class MixtureState {
 public:
  MixtureState() = default;
  MixtureState(int n, int p) : z_(n, -1), p_(p) {}

  int n() const { return static_cast<int>(z_.size()); }
  int p() const { return p_; }
  int k_total() const { return live_count_; }
  int occupied_count() const { return occupied_count_; }

  const std::vector<int>& z() const { return z_; }
  int z_of(int i) const { return z_[i]; }
  bool live(int id) const {
    return id >= 0 && id < static_cast<int>(slots_.size()) && live_[id];
  }
  int count(int id) const { return counts_[id]; }
  const ComponentParams& comp(int id) const { return slots_[id]; }
  ComponentParams& comp(int id) { return slots_[id]; }

  std::vector<int> occupied_ids() const;
  std::vector<int> empty_ids() const;
  std::vector<int> live_ids() const;

  int add_component(ComponentParams params);
  void remove_component(int id);  // id must be live and empty
  void assign(int i, int id);
  int detach(int i);  // removes obs i from its component; returns former id

  void check() const;  // invariant checks, throws Error("domain")

 private:
  std::vector<int> z_;
  std::vector<ComponentParams> slots_;
  std::vector<char> live_;
  std::vector<int> counts_;
  int live_count_ = 0;
  int occupied_count_ = 0;
  int p_ = 0;
};

struct StateSummary {
  int k_total = 0;
  int occupied_count = 0;
  std::map<int, int> cluster_sizes;
};

StateSummary state_summary(const MixtureState& state);

// One retained posterior draw: assignments plus the live components in
// ascending id order.  `weights` is only populated by the explicit-weight
// sampler.
struct DrawRecord {
  std::vector<int> z;
  std::vector<int> comp_ids;
  std::vector<Eigen::VectorXd> betas;
  std::vector<double> sigma2s;
  int k_total = 0;
  std::vector<double> weights;

  int occupied_count() const;
};

struct ChainDiagnostics {
  std::int64_t aux_draws = 0;
  std::int64_t aux_proposals = 0;
  std::int64_t aux_cap_events = 0;
  std::int64_t coef_sweeps = 0;
  std::int64_t coef_proposals = 0;
  std::int64_t coef_cap_events = 0;
  std::int64_t weight_underflows = 0;
  std::int64_t ztilde_underflows = 0;
  std::int64_t trunc_clamps = 0;
  std::int64_t vn_queries = 0;
  std::int64_t vn_cache_hits = 0;
};

struct Draws {
  std::vector<DrawRecord> states;
  std::string model_tag;
  std::uint64_t seed = 0;
  int n_iter = 0;
  int burn_in = 0;
  int thin = 1;
  PriorConfig prior;
  ChainDiagnostics diag;
  // per retained draw: proposal counts spent in that iteration's
  // accept-reject loops
  std::vector<std::int32_t> aux_tries_per_draw;
  std::vector<std::int32_t> coef_tries_per_draw;
};

}  // namespace repmix
