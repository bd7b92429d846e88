#include "repmix/normalizer.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace repmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of mean(h) plus delta-method standard error on the log scale.
ZkEntry reduce_h_samples(const std::vector<double>& h, std::int64_t* zero_count) {
  const int s = static_cast<int>(h.size());
  double sum = 0.0, sumsq = 0.0;
  std::int64_t zeros = 0;
  for (double v : h) {
    sum += v;
    sumsq += v * v;
    if (v == 0.0) ++zeros;
  }
  if (zero_count) *zero_count = zeros;
  ZkEntry e;
  e.n_samples = s;
  if (sum <= 0.0) {
    e.log_estimate = kNegInf;
    e.mc_std_error = 0.0;
    return e;
  }
  const double mean = sum / s;
  const double var = std::max(0.0, sumsq / s - mean * mean) * s / std::max(1, s - 1);
  e.log_estimate = std::min(0.0, std::log(mean));
  e.mc_std_error = std::sqrt(var / s) / mean;
  return e;
}

}  // namespace

double ZkTable::log_zk(int k) const {
  if (k <= 1) return 0.0;
  auto it = entries.find(k);
  if (it == entries.end()) {
    throw Error("domain", "ZkTable: no entry for K=" + std::to_string(k));
  }
  return it->second.log_estimate;
}

double ZkTable::std_error(int k) const {
  if (k <= 1) return 0.0;
  auto it = entries.find(k);
  if (it == entries.end()) {
    throw Error("domain", "ZkTable: no entry for K=" + std::to_string(k));
  }
  return it->second.mc_std_error;
}

ZkEntry estimate_zk(int k, const Dataset& data, const PriorConfig& prior,
                    BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                    std::uint64_t seed) {
  if (k < 1) throw Error("domain", "estimate_zk: K must be >= 1");
  if (k == 1 || kernel.trivial()) {
    return ZkEntry{0.0, 0.0, k == 1 ? 0 : prior.zk_samples};
  }
  ModelContext mc;
  mc.data = &data;
  mc.prior = prior;
  mc.beta_kind = beta_kind;
  mc.kernel = kernel;
  mc.g_eff = prior.resolved_g(data.n());

  const int s = prior.zk_samples;
  std::vector<double> h(s);
  std::vector<Eigen::VectorXd> betas(k);
  for (int i = 0; i < s; ++i) {
    SmallRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    for (int c = 0; c < k; ++c) {
      const double s2 = draw_prior_sigma2(mc, rng);
      betas[c] = draw_prior_beta(mc, s2, rng);
    }
    h[i] = repulsion_h(betas, kernel);
  }
  std::int64_t zeros = 0;
  ZkEntry e = reduce_h_samples(h, &zeros);
  if (e.log_estimate == kNegInf) {
    throw Error("underflow", "estimate_zk: all " + std::to_string(zeros) +
                                 " sampled h values were zero at K=" +
                                 std::to_string(k));
  }
  return e;
}

ZkTable build_zk_table(const Dataset& data, const PriorConfig& prior,
                       BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                       std::uint64_t seed) {
  ZkTable t;
  t.k_max = prior.k_max;
  t.seed = seed;
  t.key_hash = zk_key_hash(data, prior, beta_kind, kernel, seed);
  for (int k = 2; k <= prior.k_max; ++k) {
    t.entries[k] = estimate_zk(k, data, prior, beta_kind, kernel,
                               mix_seed(seed, static_cast<std::uint64_t>(k)));
  }
  return t;
}

double estimate_ztilde(const MixtureState& state, const Dataset& data,
                       const PriorConfig& prior, BetaPriorKind beta_kind,
                       const RepulsionKernel& kernel, int k, std::uint64_t seed) {
  const auto occ = state.occupied_ids();
  const int ell = static_cast<int>(occ.size());
  if (k < ell) {
    throw Error("domain", "estimate_ztilde: K below occupied count");
  }
  if (k <= 1 || kernel.trivial()) return 0.0;

  ModelContext mc;
  mc.data = &data;
  mc.prior = prior;
  mc.beta_kind = beta_kind;
  mc.kernel = kernel;
  mc.g_eff = prior.resolved_g(data.n());

  // Per-cluster sufficient statistics and the variance conditional's shape /
  // rate, taken at the state's current coefficients.
  const int p = data.p();
  std::vector<Eigen::MatrixXd> xtx(ell, Eigen::MatrixXd::Zero(p, p));
  std::vector<Eigen::VectorXd> xty(ell, Eigen::VectorXd::Zero(p));
  std::vector<double> shape(ell), rate(ell);
  for (int c = 0; c < ell; ++c) {
    const int id = occ[c];
    double rss = 0.0;
    for (int i = 0; i < state.n(); ++i) {
      if (state.z_of(i) != id) continue;
      const auto xi = data.X.row(i);
      xtx[c].noalias() += xi.transpose() * xi;
      xty[c].noalias() += xi.transpose() * data.y(i);
      const double r = data.y(i) - xi.dot(state.comp(id).beta);
      rss += r * r;
    }
    shape[c] = prior.a0 + 0.5 * state.count(id);
    rate[c] = prior.b0 + 0.5 * rss;
  }

  const int s = prior.ztilde_samples;
  std::vector<Eigen::VectorXd> betas(k);
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    SmallRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    for (int c = 0; c < ell; ++c) {
      const double s2 = rtrunc_invgamma(rng, shape[c], rate[c],
                                        prior.sigma2_lo, prior.sigma2_hi);
      betas[c] = coef_conditional(mc, xtx[c], xty[c], s2).draw(rng);
    }
    for (int c = ell; c < k; ++c) {
      const double s2 = draw_prior_sigma2(mc, rng);
      betas[c] = draw_prior_beta(mc, s2, rng);
    }
    sum += repulsion_h(betas, kernel);
  }
  if (sum <= 0.0) {
    throw Error("underflow",
                "estimate_ztilde: all sampled h values were zero at K=" +
                    std::to_string(k));
  }
  return std::min(0.0, std::log(sum / s));
}

Theorem1Diagnostic theorem1_diagnostic(const ZkTable& table) {
  Theorem1Diagnostic d;
  for (const auto& [k, e] : table.entries) {
    const double neg_log = -e.log_estimate;
    d.per_k_ratios.emplace_back(k, neg_log / k);
    d.c1_hat = std::max(d.c1_hat, neg_log / k);
    if (neg_log < -2.0 * e.mc_std_error) {
      d.bound_ok = false;
      ++d.violations;
    }
  }
  return d;
}

std::uint64_t zk_key_hash(const Dataset& data, const PriorConfig& prior,
                          BetaPriorKind beta_kind, const RepulsionKernel& kernel,
                          std::uint64_t seed) {
  std::string key;
  auto add = [&key](double v) {
    key += format_double(v);
    key += '|';
  };
  for (int i = 0; i < data.gram.rows(); ++i) {
    for (int j = 0; j < data.gram.cols(); ++j) add(data.gram(i, j));
  }
  add(prior.resolved_g(data.n()));
  add(prior.g0);
  add(prior.a0);
  add(prior.b0);
  add(prior.sigma2_lo);
  add(prior.sigma2_hi);
  add(prior.tau2);
  add(static_cast<double>(prior.zk_samples));
  add(static_cast<double>(prior.k_max));
  key += beta_kind == BetaPriorKind::GPrior ? "gprior|" : "iso|";
  key += kernel.kind == KernelKind::Mahalanobis
             ? "mah|"
             : (kernel.kind == KernelKind::Euclidean ? "euc|" : "none|");
  key += std::to_string(seed);
  return fnv1a(key);
}

void save_zk_table(const std::string& path, const ZkTable& table,
                   const Theorem1Diagnostic* diag) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["key_hash"] = table.key_hash;
  j["seed"] = table.seed;
  j["k_max"] = table.k_max;
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [k, e] : table.entries) {
    entries[std::to_string(k)] = {{"log_estimate", e.log_estimate},
                                  {"mc_std_error", e.mc_std_error},
                                  {"n_samples", e.n_samples}};
  }
  j["entries"] = entries;
  if (diag) {
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& [k, r] : diag->per_k_ratios) {
      ratios.push_back({{"k", k}, {"ratio", r}});
    }
    j["theorem1"] = {{"c1_hat", diag->c1_hat},
                     {"bound_ok", diag->bound_ok},
                     {"violations", diag->violations},
                     {"per_k_ratios", ratios}};
  }
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "write failed: " + path);
}

bool load_zk_table(const std::string& path, std::uint64_t expect_hash,
                   ZkTable* out) {
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (!j.contains("key_hash") || j["key_hash"].get<std::uint64_t>() != expect_hash) {
    return false;
  }
  ZkTable t;
  t.key_hash = expect_hash;
  t.seed = j.value("seed", 0ULL);
  t.k_max = j.value("k_max", 1);
  for (const auto& [ks, e] : j.at("entries").items()) {
    t.entries[std::stoi(ks)] = ZkEntry{e.at("log_estimate").get<double>(),
                                       e.at("mc_std_error").get<double>(),
                                       e.at("n_samples").get<int>()};
  }
  *out = std::move(t);
  return true;
}

}  // namespace repmix
