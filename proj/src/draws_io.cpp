#include "repmix/draws_io.hpp"

#include <fstream>

#include <json.hpp>

#include "repmix/error.hpp"

namespace repmix {

void save_draws_jsonl(const std::string& path, const Draws& draws) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);

  nlohmann::json header;
  header["schema_version"] = 1;
  nlohmann::json meta;
  meta["model"] = draws.model_tag;
  meta["seed"] = draws.seed;
  meta["n_iter"] = draws.n_iter;
  meta["burn_in"] = draws.burn_in;
  meta["thin"] = draws.thin;
  meta["n_states"] = draws.states.size();
  const PriorConfig& pr = draws.prior;
  meta["prior"] = {
      {"g", pr.g},
      {"g0", pr.g0},
      {"alpha", pr.alpha},
      {"a0", pr.a0},
      {"b0", pr.b0},
      {"sigma2_lo", pr.sigma2_lo},
      {"sigma2_hi", pr.sigma2_hi},
      {"lambda", pr.k_prior.lambda},
      {"k_max", pr.k_max},
      {"zk_samples", pr.zk_samples},
      {"ztilde_samples", pr.ztilde_samples},
      {"m_window", pr.m_window},
      {"tau2", pr.tau2},
      {"max_rejection_iters", pr.max_rejection_iters},
      {"k_weight", pr.k_weight == KWeightRule::Literal ? "literal" : "general"},
  };
  const ChainDiagnostics& dg = draws.diag;
  meta["diagnostics"] = {
      {"aux_draws", dg.aux_draws},
      {"aux_proposals", dg.aux_proposals},
      {"aux_cap_events", dg.aux_cap_events},
      {"coef_sweeps", dg.coef_sweeps},
      {"coef_proposals", dg.coef_proposals},
      {"coef_cap_events", dg.coef_cap_events},
      {"weight_underflows", dg.weight_underflows},
      {"ztilde_underflows", dg.ztilde_underflows},
      {"trunc_clamps", dg.trunc_clamps},
      {"vn_queries", dg.vn_queries},
      {"vn_cache_hits", dg.vn_cache_hits},
  };
  meta["aux_tries_per_draw"] = draws.aux_tries_per_draw;
  meta["coef_tries_per_draw"] = draws.coef_tries_per_draw;
  header["meta"] = meta;
  out << header.dump() << "\n";

  for (const auto& rec : draws.states) {
    nlohmann::json line;
    line["z"] = rec.z;
    line["k_total"] = rec.k_total;
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t c = 0; c < rec.comp_ids.size(); ++c) {
      nlohmann::json comp;
      comp["id"] = rec.comp_ids[c];
      comp["beta"] = std::vector<double>(rec.betas[c].data(),
                                         rec.betas[c].data() + rec.betas[c].size());
      comp["sigma2"] = rec.sigma2s[c];
      comps.push_back(std::move(comp));
    }
    line["components"] = std::move(comps);
    if (!rec.weights.empty()) line["weights"] = rec.weights;
    out << line.dump() << "\n";
  }
  if (!out) throw Error("io", "write failed: " + path);
}

}  // namespace repmix
