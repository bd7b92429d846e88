#include "repmix/state.hpp"

#include <algorithm>
#include <set>

#include "repmix/error.hpp"

namespace repmix {

std::vector<int> MixtureState::occupied_ids() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(slots_.size()); ++id) {
    if (live_[id] && counts_[id] > 0) out.push_back(id);
  }
  return out;
}

std::vector<int> MixtureState::empty_ids() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(slots_.size()); ++id) {
    if (live_[id] && counts_[id] == 0) out.push_back(id);
  }
  return out;
}

std::vector<int> MixtureState::live_ids() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(slots_.size()); ++id) {
    if (live_[id]) out.push_back(id);
  }
  return out;
}

int MixtureState::add_component(ComponentParams params) {
  if (p_ == 0) p_ = static_cast<int>(params.beta.size());
  if (params.beta.size() != p_) {
    throw Error("dim", "add_component: beta length mismatch");
  }
  int id = -1;
  for (int s = 0; s < static_cast<int>(slots_.size()); ++s) {
    if (!live_[s]) {
      id = s;
      break;
    }
  }
  if (id < 0) {
    id = static_cast<int>(slots_.size());
    slots_.emplace_back();
    live_.push_back(0);
    counts_.push_back(0);
  }
  slots_[id] = std::move(params);
  live_[id] = 1;
  counts_[id] = 0;
  ++live_count_;
  return id;
}

void MixtureState::remove_component(int id) {
  if (!live(id)) throw Error("domain", "remove_component: id not live");
  if (counts_[id] != 0) throw Error("domain", "remove_component: id occupied");
  live_[id] = 0;
  --live_count_;
}

void MixtureState::assign(int i, int id) {
  if (!live(id)) throw Error("domain", "assign: id not live");
  if (z_[i] != -1) throw Error("domain", "assign: observation already assigned");
  z_[i] = id;
  if (counts_[id]++ == 0) ++occupied_count_;
}

int MixtureState::detach(int i) {
  const int id = z_[i];
  if (id < 0) return -1;
  z_[i] = -1;
  if (--counts_[id] == 0) --occupied_count_;
  return id;
}

void MixtureState::check() const {
  std::vector<int> recount(slots_.size(), 0);
  for (int i = 0; i < n(); ++i) {
    const int id = z_[i];
    if (!live(id)) throw Error("domain", "state: z refers to dead component");
    ++recount[id];
  }
  int occ = 0, liv = 0;
  for (int id = 0; id < static_cast<int>(slots_.size()); ++id) {
    if (!live_[id]) continue;
    ++liv;
    if (recount[id] != counts_[id]) throw Error("domain", "state: count drift");
    if (counts_[id] > 0) ++occ;
  }
  if (liv != live_count_ || occ != occupied_count_) {
    throw Error("domain", "state: cached totals drifted");
  }
  if (occ > live_count_ || live_count_ > static_cast<int>(slots_.size())) {
    throw Error("domain", "state: component bookkeeping out of range");
  }
}

StateSummary state_summary(const MixtureState& state) {
  if (state.n() == 0 || state.k_total() == 0) {
    throw Error("domain", "state_summary: empty state");
  }
  state.check();
  StateSummary s;
  s.k_total = state.k_total();
  s.occupied_count = state.occupied_count();
  for (int id : state.occupied_ids()) s.cluster_sizes[id] = state.count(id);
  return s;
}

int DrawRecord::occupied_count() const {
  std::set<int> labels(z.begin(), z.end());
  return static_cast<int>(labels.size());
}

}  // namespace repmix
