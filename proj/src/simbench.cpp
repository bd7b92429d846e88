#include "repmix/simbench.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "repmix/parallel.hpp"

namespace repmix {

namespace {

struct ScenarioDef {
  Eigen::MatrixXd coef;     // k_true x p
  Eigen::MatrixXd sigma_x;  // p x p, ignored for toy
  bool toy = false;
};

ScenarioDef scenario_def(const std::string& id) {
  ScenarioDef d;
  if (id == "toy") {
    d.toy = true;
    d.coef.resize(3, 2);
    d.coef << -5.0, 2.5, 0.0, 1.0, -1.0, 1.5;
    return d;
  }
  Eigen::Vector4d scales;
  if (id == "s1") {
    scales << 10.0, 10.0, 10.0, 10.0;
    d.sigma_x = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) d.sigma_x(i, i) = scales(i) * scales(i);
  } else if (id == "s2" || id == "s3") {
    scales << 10.0, 10.0, 10.0, 100.0;
    const double rho = 0.5;
    d.sigma_x.resize(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        d.sigma_x(i, j) = scales(i) * scales(j) * std::pow(rho, std::abs(i - j));
      }
    }
  } else {
    throw Error("config", "unknown scenario: " + id);
  }
  d.coef = Eigen::MatrixXd::Zero(4, 4);
  if (id == "s1") {
    for (int k = 0; k < 4; ++k) d.coef(k, k) = 1.0;
  } else if (id == "s2") {
    for (int k = 0; k < 3; ++k) d.coef(k, k) = 1.0;
    d.coef(3, 3) = 0.01;
  } else {
    d.coef << 1, 1, 0, 0,
              0, 1, 1, 0,
              0, 0, 1, 0.01,
              1, 0, 0, 0.01;
  }
  return d;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double sample_se(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / (v.size() - 1) / v.size());
}

}  // namespace

bool known_scenario(const std::string& id) {
  return id == "toy" || id == "s1" || id == "s2" || id == "s3";
}

GeneratedData gen_scenario(const ScenarioSpec& spec) {
  const ScenarioDef def = scenario_def(spec.id);
  const int k_true = static_cast<int>(def.coef.rows());
  const int p = static_cast<int>(def.coef.cols());
  const int n_per = def.toy ? 1000 : spec.n_per;
  if (n_per < 1) throw Error("config", "gen_scenario: n_per must be positive");
  const int n = k_true * n_per;

  std::mt19937_64 rng = make_engine(mix_seed(spec.seed, fnv1a(spec.id)));
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  std::vector<int> truth(n);

  Eigen::MatrixXd chol;
  if (!def.toy) chol = spd_cholesky(def.sigma_x);

  int row = 0;
  for (int k = 0; k < k_true; ++k) {
    for (int j = 0; j < n_per; ++j, ++row) {
      if (def.toy) {
        const double x = 10.0 * runif(rng);
        X(row, 0) = 1.0;
        X(row, 1) = x;
      } else {
        Eigen::VectorXd zv(p);
        for (int c = 0; c < p; ++c) zv(c) = rnorm(rng);
        X.row(row) = (Eigen::VectorXd::Ones(p) + chol * zv).transpose();
      }
      y(row) = X.row(row).dot(def.coef.row(k)) + rnorm(rng);
      truth[row] = k + 1;
    }
  }
  GeneratedData out{build_dataset(X, y), std::move(truth), def.coef};
  return out;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, const std::string& scenario,
                             const std::string& method, int replicate) {
  std::uint64_t s = mix_seed(base_seed, fnv1a(scenario));
  s = mix_seed(s, fnv1a(method));
  return mix_seed(s, static_cast<std::uint64_t>(replicate));
}

BenchResult run_benchmark(const BenchConfig& cfg) {
  if (cfg.reps < 2) throw Error("config", "bench: reps must be >= 2");
  cfg.prior.validate();
  cfg.sid1.validate();
  cfg.sid2.validate();
  for (const auto& s : cfg.scenarios) {
    if (!known_scenario(s)) throw Error("config", "unknown scenario: " + s);
  }
  for (const auto& m : cfg.methods) {
    if (m != "rgrm" && m != "rrm" && m != "mfm" && m != "sid1" && m != "sid2") {
      throw Error("config", "unknown method: " + m);
    }
  }

  struct Task {
    std::string scenario;
    int n_per;
    std::string method;
    int rep;
  };
  std::vector<Task> tasks;
  for (const auto& sc : cfg.scenarios) {
    for (int n_per : cfg.n_pers) {
      for (const auto& m : cfg.methods) {
        for (int r = 0; r < cfg.reps; ++r) tasks.push_back({sc, n_per, m, r});
      }
    }
  }

  auto cell_n = [](const std::string& scenario, int n_per) {
    return scenario == "toy" ? 3000 : 4 * n_per;
  };

  std::vector<RepRow> rows(tasks.size());
  parallel_for_indexed(
      static_cast<int>(tasks.size()), cfg.jobs, [&](int ti) {
        const Task& t = tasks[ti];
        RepRow row;
        row.scenario = t.scenario;
        row.n = cell_n(t.scenario, t.n_per);
        row.method = t.method;
        row.rep = t.rep;
        const std::string cell_key = t.scenario + ":" + std::to_string(row.n);
        row.seed = replicate_seed(cfg.base_seed, cell_key, t.method, t.rep);
        try {
          ScenarioSpec spec{t.scenario, t.n_per, mix_seed(row.seed, 1)};
          GeneratedData gd = gen_scenario(spec);

          ChainConfig chain = cfg.chain;
          chain.seed = mix_seed(row.seed, 2);

          Draws draws;
          double eff = 1e-3;
          if (t.method == "rgrm") {
            ZkTable zk = build_zk_table(
                gd.data, cfg.prior, BetaPriorKind::GPrior,
                RepulsionKernel::mahalanobis(gd.data.gram,
                                             cfg.prior.resolved_g(gd.data.n()),
                                             cfg.prior.g0),
                mix_seed(row.seed, 3));
            draws = run_rgrm(gd.data, cfg.prior, chain, zk);
          } else if (t.method == "rrm") {
            ZkTable zk = build_zk_table(gd.data, cfg.prior,
                                        BetaPriorKind::Isotropic,
                                        RepulsionKernel::euclidean(cfg.prior.g0),
                                        mix_seed(row.seed, 3));
            draws = run_rrm(gd.data, cfg.prior, chain, zk);
          } else if (t.method == "mfm") {
            draws = run_mfm(gd.data, cfg.prior, chain);
          } else {
            const SidConfig& sid = t.method == "sid1" ? cfg.sid1 : cfg.sid2;
            eff = sid.eff_threshold;
            draws = run_sid(gd.data, sid, chain);
          }
          const Draws relabeled = relabel_draws(draws);
          row.report = evaluate(gd.data, relabeled, &gd.truth, eff,
                                cfg.rmse_ols_refit);
        } catch (const std::exception& e) {
          row.failed = true;
          row.error = e.what();
        }
        rows[ti] = std::move(row);
      });

  BenchResult result;
  result.rows = std::move(rows);
  for (const auto& sc : cfg.scenarios) {
    for (int n_per : cfg.n_pers) {
      for (const auto& m : cfg.methods) {
        BenchCell cell;
        cell.scenario = sc;
        cell.n = cell_n(sc, n_per);
        cell.method = m;
        std::vector<double> ari, rmse, khat, pur;
        for (const auto& row : result.rows) {
          if (row.scenario != sc || row.method != m || row.n != cell.n) continue;
          if (row.failed) {
            ++cell.reps_failed;
            continue;
          }
          ++cell.reps_ok;
          ari.push_back(row.report.ari);
          rmse.push_back(row.report.rmse);
          khat.push_back(row.report.k_hat_mean);
          pur.push_back(row.report.purity);
        }
        cell.ari_mean = sample_mean(ari);
        cell.ari_se = sample_se(ari, cell.ari_mean);
        cell.rmse_mean = sample_mean(rmse);
        cell.rmse_se = sample_se(rmse, cell.rmse_mean);
        cell.khat_mean = sample_mean(khat);
        cell.khat_se = sample_se(khat, cell.khat_mean);
        cell.purity_mean = sample_mean(pur);
        cell.purity_se = sample_se(pur, cell.purity_mean);
        cell.valid = cell.reps_failed * 10 <= cfg.reps;
        if (!cell.valid) result.all_valid = false;
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

void save_bench_csv(const std::string& path, const BenchResult& result) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << "scenario,n,method,ari,ari_se,rmse,rmse_se,k_hat,k_hat_se,purity,"
         "purity_se,reps,failures\n";
  for (const auto& c : result.cells) {
    out << c.scenario << "," << c.n << "," << c.method << ","
        << format_double(c.ari_mean) << "," << format_double(c.ari_se) << ","
        << format_double(c.rmse_mean) << "," << format_double(c.rmse_se) << ","
        << format_double(c.khat_mean) << "," << format_double(c.khat_se) << ","
        << format_double(c.purity_mean) << "," << format_double(c.purity_se)
        << "," << c.reps_ok << "," << c.reps_failed << "\n";
  }
  if (!out) throw Error("io", "write failed: " + path);
}

void save_bench_json(const std::string& path, const BenchResult& result) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["all_valid"] = result.all_valid;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"scenario", c.scenario},
                     {"n", c.n},
                     {"method", c.method},
                     {"ari", c.ari_mean},
                     {"ari_se", c.ari_se},
                     {"rmse", c.rmse_mean},
                     {"rmse_se", c.rmse_se},
                     {"k_hat", c.khat_mean},
                     {"k_hat_se", c.khat_se},
                     {"purity", c.purity_mean},
                     {"purity_se", c.purity_se},
                     {"reps_ok", c.reps_ok},
                     {"reps_failed", c.reps_failed},
                     {"valid", c.valid}});
  }
  j["cells"] = cells;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row{{"scenario", r.scenario}, {"n", r.n},
                       {"method", r.method},    {"rep", r.rep},
                       {"seed", r.seed},        {"failed", r.failed}};
    if (r.failed) {
      row["error"] = r.error;
    } else {
      row["ari"] = r.report.ari;
      row["purity"] = r.report.purity;
      row["rmse"] = r.report.rmse;
      row["k_hat_mean"] = r.report.k_hat_mean;
      row["k_hat_mode"] = r.report.k_hat_mode;
    }
    rows.push_back(std::move(row));
  }
  j["replicates"] = rows;
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "write failed: " + path);
}

GeometryReport geometry_report(const Dataset& data,
                               const std::vector<Eigen::VectorXd>& betas,
                               double g) {
  const int m = static_cast<int>(betas.size());
  if (m < 2) throw Error("domain", "geometry_report: need at least 2 vectors");
  const RepulsionKernel euc = RepulsionKernel::euclidean(1.0);
  const RepulsionKernel mah = RepulsionKernel::mahalanobis(data.gram, g, 1.0);
  GeometryReport rep;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      rep.pairs.emplace_back(a, b);
      rep.beta_space_dists.push_back(pair_distance(betas[a], betas[b], euc));
      rep.mean_space_dists.push_back(pair_distance(betas[a], betas[b], mah));
    }
  }
  const int np = static_cast<int>(rep.pairs.size());
  for (int a = 0; a < np; ++a) {
    for (int b = a + 1; b < np; ++b) {
      const double da = rep.beta_space_dists[a] - rep.beta_space_dists[b];
      const double db = rep.mean_space_dists[a] - rep.mean_space_dists[b];
      if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
        ++rep.ordering_flips;
      }
    }
  }
  return rep;
}

}  // namespace repmix
