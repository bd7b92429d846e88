#include "repmix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace repmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// min over occupied components of G(d(candidate, beta_c)), combined with the
// fixed pairwise floor of the occupied set by the caller.
double min_g_against(const MixtureState& state, const std::vector<int>& ids,
                     const Eigen::VectorXd& candidate, const RepulsionKernel& kernel) {
  double h = 1.0;
  for (int id : ids) {
    h = std::min(h, repulsion_g(pair_distance(state.comp(id).beta, candidate, kernel),
                                kernel.g0));
    if (h == 0.0) break;
  }
  return h;
}

double h_of_ids(const MixtureState& state, const std::vector<int>& ids,
                const RepulsionKernel& kernel) {
  double h = 1.0;
  const int m = static_cast<int>(ids.size());
  for (int a = 0; a < m && h > 0.0; ++a) {
    for (int b = a + 1; b < m; ++b) {
      h = std::min(h, repulsion_g(pair_distance(state.comp(ids[a]).beta,
                                                state.comp(ids[b]).beta, kernel),
                                  kernel.g0));
      if (h == 0.0) break;
    }
  }
  return h;
}

int sample_categorical(const std::vector<double>& log_w, std::mt19937_64& rng,
                       bool* underflow) {
  double m = kNegInf;
  for (double w : log_w) m = std::max(m, w);
  if (m == kNegInf) {
    *underflow = true;
    return -1;
  }
  *underflow = false;
  double total = 0.0;
  std::vector<double> w(log_w.size());
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    w[i] = std::exp(log_w[i] - m);
    total += w[i];
  }
  double u = runif(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

}  // namespace

void ChainConfig::validate(int n) const {
  if (n_iter < 1) throw Error("config", "chain: n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter) {
    throw Error("config", "chain: need 0 <= burn_in < n_iter");
  }
  if (thin < 1) throw Error("config", "chain: thin must be positive");
  if (init == Init::Given && static_cast<int>(init_z.size()) != n) {
    throw Error("config", "chain: init_z length must equal n");
  }
  if (init == Init::RandomClusters && init_k < 1) {
    throw Error("config", "chain: init_k must be positive");
  }
}

ComponentParams draw_auxiliary_component(const MixtureState& state,
                                         const ModelContext& mc,
                                         std::mt19937_64& rng,
                                         ChainDiagnostics& diag) {
  ++diag.aux_draws;
  const auto occ = state.occupied_ids();
  const double h_occ = h_of_ids(state, occ, mc.kernel);
  ComponentParams cand;
  for (int t = 0; t < mc.prior.max_rejection_iters; ++t) {
    ++diag.aux_proposals;
    bool clamped = false;
    cand = draw_prior_component(mc, rng, &clamped);
    if (clamped) ++diag.trunc_clamps;
    if (mc.kernel.trivial()) return cand;
    const double h = std::min(h_occ, min_g_against(state, occ, cand.beta, mc.kernel));
    if (h >= 1.0 || runif(rng) < h) return cand;
  }
  ++diag.aux_cap_events;
  return cand;
}

void assignment_sweep(MixtureState& state, const ModelContext& mc, VnCache& vn,
                      std::mt19937_64& rng, ChainDiagnostics& diag) {
  const Dataset& data = *mc.data;
  const double alpha = mc.prior.alpha;

  for (int id : state.empty_ids()) state.remove_component(id);

  for (int i = 0; i < state.n(); ++i) {
    const int old_id = state.detach(i);
    if (old_id >= 0 && state.count(old_id) == 0) state.remove_component(old_id);

    const ComponentParams aux = draw_auxiliary_component(state, mc, rng, diag);
    const auto occ = state.occupied_ids();
    const int ell = static_cast<int>(occ.size());
    const auto xi = data.X.row(i);

    if (ell == 0) {
      state.assign(i, state.add_component(aux));
      continue;
    }

    std::vector<double> log_w(ell + 1);
    for (int c = 0; c < ell; ++c) {
      const ComponentParams& comp = state.comp(occ[c]);
      log_w[c] = std::log(state.count(occ[c]) + alpha) +
                 log_normal_pdf(data.y(i), xi.dot(comp.beta), comp.sigma2);
    }
    const double log_vn_ratio = vn.log_vn(ell + 1) - vn.log_vn(ell);
    log_w[ell] = log_vn_ratio + std::log(alpha) +
                 log_normal_pdf(data.y(i), xi.dot(aux.beta), aux.sigma2);

    bool underflow = false;
    int pick = sample_categorical(log_w, rng, &underflow);
    if (underflow) {
      ++diag.weight_underflows;
      pick = static_cast<int>(runif(rng) * ell);
      pick = std::min(pick, ell - 1);
    }
    if (pick == ell) {
      state.assign(i, state.add_component(aux));
    } else {
      state.assign(i, occ[pick]);
    }
  }
}

int sample_component_count(MixtureState& state, const ModelContext& mc,
                           const ZkTable& zk, std::mt19937_64& rng,
                           ChainDiagnostics& diag) {
  const int ell = state.occupied_count();
  const int n = state.n();
  const int hi = std::min(ell + mc.prior.m_window, mc.prior.k_max);

  int k_new = ell;
  if (hi > ell) {
    std::vector<double> log_w(hi - ell + 1, kNegInf);
    for (int k = ell; k <= hi; ++k) {
      double log_ratio = 0.0;
      if (!mc.kernel.trivial()) {
        try {
          const double lzt = estimate_ztilde(state, *mc.data, mc.prior,
                                             mc.beta_kind, mc.kernel, k,
                                             rng());
          log_ratio = lzt - zk.log_zk(k);
        } catch (const Error& e) {
          if (e.kind() != "underflow") throw;
          ++diag.ztilde_underflows;
          continue;
        }
      }
      double log_comb;
      if (mc.prior.k_weight == KWeightRule::Literal) {
        log_comb = std::lgamma(k + 1.0) - std::lgamma(k - ell + 1.0) -
                   std::lgamma(k + n + 1.0);
      } else {
        log_comb = mc.prior.k_prior.log_pmf(k) + std::lgamma(k + 1.0) -
                   std::lgamma(k - ell + 1.0) +
                   std::lgamma(mc.prior.alpha * k) -
                   std::lgamma(mc.prior.alpha * k + n);
      }
      log_w[k - ell] = log_ratio + log_comb;
    }
    bool underflow = false;
    const int pick = sample_categorical(log_w, rng, &underflow);
    k_new = underflow ? ell : ell + pick;
  }

  for (int c = ell; c < k_new; ++c) {
    bool clamped = false;
    state.add_component(draw_prior_component(mc, rng, &clamped));
    if (clamped) ++diag.trunc_clamps;
  }
  return k_new;
}

void variance_sweep(MixtureState& state, const ModelContext& mc,
                    std::mt19937_64& rng, ChainDiagnostics& diag) {
  const Dataset& data = *mc.data;
  std::vector<int> ids = state.live_ids();
  std::vector<double> rss_by_id;
  std::vector<int> pos(ids.empty() ? 0 : ids.back() + 1, -1);
  rss_by_id.assign(ids.size(), 0.0);
  for (std::size_t c = 0; c < ids.size(); ++c) pos[ids[c]] = static_cast<int>(c);
  for (int i = 0; i < state.n(); ++i) {
    const int id = state.z_of(i);
    const double r = data.y(i) - data.X.row(i).dot(state.comp(id).beta);
    rss_by_id[pos[id]] += r * r;
  }
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const int id = ids[c];
    const double shape = mc.prior.a0 + 0.5 * state.count(id);
    const double rate = mc.prior.b0 + 0.5 * rss_by_id[c];
    bool clamped = false;
    state.comp(id).sigma2 =
        rtrunc_invgamma(rng, shape, rate, mc.prior.sigma2_lo,
                        mc.prior.sigma2_hi, &clamped);
    if (clamped) ++diag.trunc_clamps;
  }
}

void coefficient_sweep(MixtureState& state, const ModelContext& mc,
                       std::mt19937_64& rng, ChainDiagnostics& diag) {
  const Dataset& data = *mc.data;
  const int p = data.p();
  ++diag.coef_sweeps;

  const auto ids = state.live_ids();
  const int k = static_cast<int>(ids.size());
  std::vector<int> pos(ids.empty() ? 0 : ids.back() + 1, -1);
  for (int c = 0; c < k; ++c) pos[ids[c]] = c;

  std::vector<Eigen::MatrixXd> xtx(k, Eigen::MatrixXd::Zero(p, p));
  std::vector<Eigen::VectorXd> xty(k, Eigen::VectorXd::Zero(p));
  for (int i = 0; i < state.n(); ++i) {
    const int c = pos[state.z_of(i)];
    const auto xi = data.X.row(i);
    xtx[c].noalias() += xi.transpose() * xi;
    xty[c].noalias() += xi.transpose() * data.y(i);
  }

  std::vector<GaussianConditional> cond(k);
  std::vector<bool> occupied(k);
  for (int c = 0; c < k; ++c) {
    occupied[c] = state.count(ids[c]) > 0;
    if (occupied[c]) {
      cond[c] = coef_conditional(mc, xtx[c], xty[c], state.comp(ids[c]).sigma2);
    }
  }

  std::vector<Eigen::VectorXd> proposal(k);
  for (int t = 0; t < mc.prior.max_rejection_iters; ++t) {
    ++diag.coef_proposals;
    for (int c = 0; c < k; ++c) {
      proposal[c] = occupied[c]
                        ? cond[c].draw(rng)
                        : draw_prior_beta(mc, state.comp(ids[c]).sigma2, rng);
    }
    double h = 1.0;
    if (!mc.kernel.trivial()) {
      h = repulsion_h(proposal, mc.kernel);
    }
    if (h >= 1.0 || runif(rng) < h) {
      for (int c = 0; c < k; ++c) state.comp(ids[c]).beta = proposal[c];
      return;
    }
  }
  ++diag.coef_cap_events;  // keep previous coefficients
}

MixtureState init_state(const ModelContext& mc, const ChainConfig& cfg,
                        std::mt19937_64& rng, ChainDiagnostics& diag) {
  const Dataset& data = *mc.data;
  MixtureState st(data.n(), data.p());
  const double s2 = std::clamp(1.0, mc.prior.sigma2_lo, mc.prior.sigma2_hi);
  auto blank = [&] {
    return ComponentParams{Eigen::VectorXd::Zero(data.p()), s2};
  };
  switch (cfg.init) {
    case ChainConfig::Init::SingleCluster: {
      const int id = st.add_component(blank());
      for (int i = 0; i < data.n(); ++i) st.assign(i, id);
      break;
    }
    case ChainConfig::Init::RandomClusters: {
      // one nearest-centroid pass over standardized (x, y) rows, seeded by
      // init_k randomly chosen observations
      const int n = data.n();
      const int p = data.p();
      const int k0 = std::min(cfg.init_k, n);
      Eigen::MatrixXd feat(n, p + 1);
      feat.leftCols(p) = data.X;
      feat.col(p) = data.y;
      Eigen::RowVectorXd mean = feat.colwise().mean();
      Eigen::RowVectorXd sd =
          ((feat.rowwise() - mean).array().square().colwise().sum() / n)
              .sqrt()
              .matrix();
      for (int j = 0; j <= p; ++j) {
        if (!(sd(j) > 0.0)) sd(j) = 1.0;
      }
      Eigen::MatrixXd std_feat =
          (feat.rowwise() - mean).array().rowwise() / sd.array();
      std::vector<int> centers(k0);
      for (int c = 0; c < k0; ++c) {
        centers[c] = std::min(n - 1, static_cast<int>(runif(rng) * n));
      }
      std::vector<int> ids(k0);
      for (int c = 0; c < k0; ++c) ids[c] = st.add_component(blank());
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k0; ++c) {
          const double dist =
              (std_feat.row(i) - std_feat.row(centers[c])).squaredNorm();
          if (dist < best_d) {
            best_d = dist;
            best = c;
          }
        }
        st.assign(i, ids[best]);
      }
      for (int id : st.empty_ids()) st.remove_component(id);
      break;
    }
    case ChainConfig::Init::Given: {
      std::vector<int> labels = cfg.init_z;
      std::vector<int> uniq = labels;
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      std::vector<int> ids(uniq.size());
      for (std::size_t c = 0; c < uniq.size(); ++c) ids[c] = st.add_component(blank());
      for (int i = 0; i < data.n(); ++i) {
        const auto it = std::lower_bound(uniq.begin(), uniq.end(), labels[i]);
        st.assign(i, ids[it - uniq.begin()]);
      }
      break;
    }
  }
  // settle parameters at their conditionals before the first sweep
  variance_sweep(st, mc, rng, diag);
  coefficient_sweep(st, mc, rng, diag);
  return st;
}

Draws run_chain(const Dataset& data, const PriorConfig& prior,
                const ModelContext& mc, const ChainConfig& cfg,
                const ZkTable& zk) {
  prior.validate();
  cfg.validate(data.n());
  if (!mc.kernel.trivial()) {
    for (int k = 2; k <= prior.k_max; ++k) zk.log_zk(k);  // coverage check
  }

  Draws draws;
  draws.model_tag = mc.tag;
  draws.seed = cfg.seed;
  draws.n_iter = cfg.n_iter;
  draws.burn_in = cfg.burn_in;
  draws.thin = cfg.thin;
  draws.prior = prior;

  std::mt19937_64 rng = make_engine(cfg.seed);
  ChainDiagnostics& diag = draws.diag;
  VnCache vn(data.n(), prior.alpha, prior.k_prior);
  MixtureState st = init_state(mc, cfg, rng, diag);

  for (int it = 0; it < cfg.n_iter; ++it) {
    const std::int64_t aux0 = diag.aux_proposals;
    const std::int64_t coef0 = diag.coef_proposals;
    assignment_sweep(st, mc, vn, rng, diag);
    sample_component_count(st, mc, zk, rng, diag);
    variance_sweep(st, mc, rng, diag);
    coefficient_sweep(st, mc, rng, diag);

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      DrawRecord rec;
      rec.z = st.z();
      rec.k_total = st.k_total();
      for (int id : st.live_ids()) {
        rec.comp_ids.push_back(id);
        rec.betas.push_back(st.comp(id).beta);
        rec.sigma2s.push_back(st.comp(id).sigma2);
      }
      draws.states.push_back(std::move(rec));
      draws.aux_tries_per_draw.push_back(
          static_cast<std::int32_t>(diag.aux_proposals - aux0));
      draws.coef_tries_per_draw.push_back(
          static_cast<std::int32_t>(diag.coef_proposals - coef0));
    }
  }
  diag.vn_queries = vn.queries();
  diag.vn_cache_hits = vn.hits();
  return draws;
}

Draws run_rgrm(const Dataset& data, const PriorConfig& prior,
               const ChainConfig& cfg, const ZkTable& zk) {
  return run_chain(data, prior, make_rgrm_context(data, prior), cfg, zk);
}

Draws run_rrm(const Dataset& data, const PriorConfig& prior,
              const ChainConfig& cfg, const ZkTable& zk) {
  return run_chain(data, prior, make_rrm_context(data, prior), cfg, zk);
}

Draws run_mfm(const Dataset& data, const PriorConfig& prior,
              const ChainConfig& cfg) {
  ZkTable trivial;
  trivial.k_max = prior.k_max;
  return run_chain(data, prior, make_mfm_context(data, prior), cfg, trivial);
}

}  // namespace repmix
