#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repmix/draws_io.hpp"
#include "repmix/metrics.hpp"
#include "repmix/normalizer.hpp"
#include "repmix/sampler.hpp"
#include "repmix/sid.hpp"
#include "repmix/simbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repmix;

namespace {

json default_config() {
  return json{
      {"prior",
       {{"g", 0.0},
        {"g0", 1.0},
        {"alpha", 1.0},
        {"a0", 4.0},
        {"b0", 4.0},
        {"sigma2_lo", 1e-4},
        {"sigma2_hi", 1e4},
        {"k_prior", "poisson"},
        {"lambda", 1.0},
        {"k_max", 20},
        {"zk_samples", 20000},
        {"ztilde_samples", 2000},
        {"m_window", 2},
        {"tau2", 1.0},
        {"max_rejection_iters", 1000},
        {"k_weight", "literal"}}},
      {"chain",
       {{"n_iter", 2000},
        {"burn_in", 1000},
        {"thin", 1},
        {"seed", 1},
        {"init", "single-cluster"},
        {"init_k", 5}}},
      {"sid",
       {{"k_fit", 20},
        {"alpha_total", 0.1},
        {"tau2", 1.0},
        {"a0", 4.0},
        {"b0", 4.0},
        {"eff_threshold", 1e-3}}},
      {"fit", {{"method", "rgrm"}, {"data", ""}, {"label", "-"}, {"rmse", "ols"}}},
      {"simulate", {{"scenario", "s1"}, {"n_per", 25}, {"seed", 0}}},
      {"bench",
       {{"scenarios", json::array({"s1"})},
        {"n_pers", json::array({50})},
        {"methods", json::array({"rgrm", "rrm", "mfm", "sid1", "sid2"})},
        {"reps", 20},
        {"base_seed", 1},
        {"sid1_alpha", 0.1},
        {"sid2_alpha", 0.02}}},
      {"zk", {{"data", ""}, {"method", "rgrm"}}},
      {"geometry", {{"data", ""}, {"betas", ""}}}};
}

void merge_into(json& base, const json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge_into(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

// Flat overrides of the form --section.key=value.
void apply_overrides(json& cfg, const std::vector<std::string>& extras) {
  for (const auto& raw : extras) {
    if (raw.rfind("--", 0) != 0) throw Error("usage", "unexpected argument: " + raw);
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw Error("usage", "override must be --path.key=value: " + raw);
    }
    const std::string path = raw.substr(2, eq - 2);
    const std::string value = raw.substr(eq + 1);
    if (path.find('.') == std::string::npos) {
      throw Error("usage", "override must name section.key: " + raw);
    }
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty()) throw Error("usage", "bad override path: " + raw);
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

PriorConfig prior_from(const json& cfg) {
  const json& p = cfg.at("prior");
  PriorConfig pr;
  pr.g = p.value("g", 0.0);
  pr.g0 = p.value("g0", 1.0);
  pr.alpha = p.value("alpha", 1.0);
  pr.a0 = p.value("a0", 4.0);
  pr.b0 = p.value("b0", 4.0);
  pr.sigma2_lo = p.value("sigma2_lo", 1e-4);
  pr.sigma2_hi = p.value("sigma2_hi", 1e4);
  const std::string kp = p.value("k_prior", "poisson");
  if (kp == "poisson") {
    pr.k_prior.kind = KPrior::Kind::Poisson;
  } else if (kp == "point") {
    pr.k_prior.kind = KPrior::Kind::PointMass;
    pr.k_prior.at = p.value("k_prior_at", 1);
  } else {
    throw Error("config", "unknown k_prior: " + kp);
  }
  pr.k_prior.lambda = p.value("lambda", 1.0);
  pr.k_max = p.value("k_max", 20);
  pr.zk_samples = p.value("zk_samples", 20000);
  pr.ztilde_samples = p.value("ztilde_samples", 2000);
  pr.m_window = p.value("m_window", 2);
  pr.tau2 = p.value("tau2", 1.0);
  pr.max_rejection_iters = p.value("max_rejection_iters", 1000);
  const std::string kw = p.value("k_weight", "literal");
  if (kw == "literal") {
    pr.k_weight = KWeightRule::Literal;
  } else if (kw == "general") {
    pr.k_weight = KWeightRule::General;
  } else {
    throw Error("config", "unknown k_weight: " + kw);
  }
  pr.validate();
  return pr;
}

ChainConfig chain_from(const json& cfg) {
  const json& c = cfg.at("chain");
  ChainConfig ch;
  ch.n_iter = c.value("n_iter", 2000);
  ch.burn_in = c.value("burn_in", 1000);
  ch.thin = c.value("thin", 1);
  ch.seed = c.value("seed", 1ULL);
  const std::string init = c.value("init", "single-cluster");
  if (init == "single-cluster") {
    ch.init = ChainConfig::Init::SingleCluster;
  } else if (init == "random") {
    ch.init = ChainConfig::Init::RandomClusters;
  } else if (init == "given") {
    ch.init = ChainConfig::Init::Given;
    ch.init_z = c.value("init_z", std::vector<int>{});
  } else {
    throw Error("config", "unknown chain init: " + init);
  }
  ch.init_k = c.value("init_k", 5);
  return ch;
}

SidConfig sid_from(const json& cfg, double alpha_total) {
  const json& s = cfg.at("sid");
  SidConfig sc;
  sc.k_fit = s.value("k_fit", 20);
  sc.alpha_total = alpha_total > 0.0 ? alpha_total : s.value("alpha_total", 0.1);
  sc.tau2 = s.value("tau2", 1.0);
  sc.a0 = s.value("a0", 4.0);
  sc.b0 = s.value("b0", 4.0);
  sc.eff_threshold = s.value("eff_threshold", 1e-3);
  sc.validate();
  return sc;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

void write_report_csv(const std::string& path, const std::string& label,
                      const std::string& method, std::uint64_t seed,
                      const EvalReport& r) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  if (r.has_truth) {
    out << "scenario,n,method,seed,ari,rmse,k_hat_mean,k_hat_mode,purity\n";
    out << label << "," << r.n << "," << method << "," << seed << ","
        << format_double(r.ari) << "," << format_double(r.rmse) << ","
        << format_double(r.k_hat_mean) << "," << r.k_hat_mode << ","
        << format_double(r.purity) << "\n";
  } else {
    out << "scenario,n,method,seed,rmse,k_hat_mean,k_hat_mode\n";
    out << label << "," << r.n << "," << method << "," << seed << ","
        << format_double(r.rmse) << "," << format_double(r.k_hat_mean) << ","
        << r.k_hat_mode << "\n";
  }
  if (!out) throw Error("io", "write failed: " + path);
}

int cmd_simulate(const json& cfg, const std::string& out_dir, long long seed_flag) {
  const json& s = cfg.at("simulate");
  ScenarioSpec spec;
  spec.id = s.value("scenario", "s1");
  spec.n_per = s.value("n_per", 25);
  spec.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                             : s.value("seed", 0ULL);
  if (!known_scenario(spec.id)) throw Error("config", "unknown scenario: " + spec.id);
  GeneratedData gd = gen_scenario(spec);
  const std::string path = out_path(out_dir, "data.csv");
  save_dataset_csv(path, gd.data.X, gd.data.y, &gd.truth);
  std::cout << "wrote " << path << " (" << gd.data.n() << " rows, "
            << gd.data.p() << " covariates)\n";
  return 0;
}

int cmd_fit(const json& cfg, const std::string& out_dir, const std::string& data_flag,
            const std::string& method_flag, long long seed_flag) {
  const json& f = cfg.at("fit");
  const std::string data_path = !data_flag.empty() ? data_flag : f.value("data", "");
  if (data_path.empty()) throw Error("usage", "fit: --data is required");
  const std::string method = !method_flag.empty() ? method_flag : f.value("method", "rgrm");
  if (method != "rgrm" && method != "rrm" && method != "mfm" && method != "sid") {
    throw Error("usage", "fit: method must be one of rgrm|rrm|mfm|sid");
  }
  PriorConfig prior = prior_from(cfg);
  ChainConfig chain = chain_from(cfg);
  if (seed_flag >= 0) chain.seed = static_cast<std::uint64_t>(seed_flag);
  const bool rmse_ols = f.value("rmse", "ols") != "draws";

  LoadedCsv loaded = load_dataset_csv(data_path);
  const Dataset& data = loaded.data;

  Draws draws;
  double eff = 1e-3;
  if (method == "rgrm") {
    ZkTable zk = build_zk_table(
        data, prior, BetaPriorKind::GPrior,
        RepulsionKernel::mahalanobis(data.gram, prior.resolved_g(data.n()), prior.g0),
        mix_seed(chain.seed, fnv1a(std::string("zk"))));
    draws = run_rgrm(data, prior, chain, zk);
  } else if (method == "rrm") {
    ZkTable zk = build_zk_table(data, prior, BetaPriorKind::Isotropic,
                                RepulsionKernel::euclidean(prior.g0),
                                mix_seed(chain.seed, fnv1a(std::string("zk"))));
    draws = run_rrm(data, prior, chain, zk);
  } else if (method == "mfm") {
    draws = run_mfm(data, prior, chain);
  } else {
    SidConfig sc = sid_from(cfg, 0.0);
    eff = sc.eff_threshold;
    draws = run_sid(data, sc, chain);
  }

  const Draws relabeled = relabel_draws(draws);
  const std::vector<int>* truth = loaded.z_true ? &*loaded.z_true : nullptr;
  const EvalReport report = evaluate(data, relabeled, truth, eff, rmse_ols);

  const std::string draws_path = out_path(out_dir, "draws.jsonl");
  save_draws_jsonl(draws_path, relabeled);
  const std::string report_path = out_path(out_dir, "report.csv");
  write_report_csv(report_path, f.value("label", "-"), method, chain.seed, report);
  std::cout << "wrote " << draws_path << " and " << report_path
            << " (k_hat_mode=" << report.k_hat_mode << ")\n";
  return 0;
}

int cmd_bench(const json& cfg, const std::string& out_dir, long long seed_flag,
              int jobs) {
  const json& b = cfg.at("bench");
  BenchConfig bc;
  bc.scenarios = b.value("scenarios", std::vector<std::string>{"s1"});
  bc.n_pers = b.value("n_pers", std::vector<int>{50});
  bc.methods = b.value("methods",
                       std::vector<std::string>{"rgrm", "rrm", "mfm", "sid1", "sid2"});
  bc.reps = b.value("reps", 20);
  bc.base_seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                                : b.value("base_seed", 1ULL);
  bc.jobs = jobs;
  bc.prior = prior_from(cfg);
  bc.chain = chain_from(cfg);
  bc.sid1 = sid_from(cfg, b.value("sid1_alpha", 0.1));
  bc.sid2 = sid_from(cfg, b.value("sid2_alpha", 0.02));
  bc.rmse_ols_refit = cfg.at("fit").value("rmse", "ols") != "draws";

  const BenchResult result = run_benchmark(bc);
  save_bench_csv(out_path(out_dir, "results.csv"), result);
  save_bench_json(out_path(out_dir, "results.json"), result);
  std::cout << "wrote " << out_path(out_dir, "results.csv") << " ("
            << result.cells.size() << " cells)\n";
  if (!result.all_valid) {
    for (const auto& c : result.cells) {
      if (!c.valid) {
        std::cerr << "repmix-error: "
                  << json{{"kind", "bench-cell"},
                          {"scenario", c.scenario},
                          {"n", c.n},
                          {"method", c.method},
                          {"failures", c.reps_failed}}
                         .dump()
                  << "\n";
      }
    }
    return 3;
  }
  return 0;
}

int cmd_zk(const json& cfg, const std::string& out_dir, const std::string& data_flag,
           long long seed_flag) {
  const json& zc = cfg.at("zk");
  const std::string data_path = !data_flag.empty() ? data_flag : zc.value("data", "");
  if (data_path.empty()) throw Error("usage", "zk: --data is required");
  const std::string method = zc.value("method", "rgrm");
  PriorConfig prior = prior_from(cfg);
  const std::uint64_t seed =
      seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : 1;

  LoadedCsv loaded = load_dataset_csv(data_path);
  const Dataset& data = loaded.data;

  BetaPriorKind kind = BetaPriorKind::GPrior;
  RepulsionKernel kernel;
  if (method == "rgrm") {
    kernel = RepulsionKernel::mahalanobis(data.gram, prior.resolved_g(data.n()),
                                          prior.g0);
  } else if (method == "rrm") {
    kind = BetaPriorKind::Isotropic;
    kernel = RepulsionKernel::euclidean(prior.g0);
  } else if (method == "mfm") {
    kind = BetaPriorKind::Isotropic;
    kernel = RepulsionKernel::none();
  } else {
    throw Error("config", "zk: method must be rgrm|rrm|mfm");
  }

  ZkTable table;
  table.k_max = prior.k_max;
  table.seed = seed;
  table.key_hash = zk_key_hash(data, prior, kind, kernel, seed);
  for (int k = 2; k <= prior.k_max; ++k) {
    try {
      table.entries[k] =
          estimate_zk(k, data, prior, kind, kernel, mix_seed(seed, k));
    } catch (const Error& e) {
      if (e.kind() != "underflow") throw;
      std::cerr << "warning: " << e.what() << "\n";
    }
  }
  const Theorem1Diagnostic diag = theorem1_diagnostic(table);
  const std::string path = out_path(out_dir, "zk.json");
  save_zk_table(path, table, &diag);
  std::cout << "wrote " << path << " (c1_hat=" << format_double(diag.c1_hat)
            << ", bound_ok=" << (diag.bound_ok ? "yes" : "no") << ")\n";
  return 0;
}

int cmd_geometry(const json& cfg, const std::string& out_dir,
                 const std::string& data_flag, const std::string& betas_flag) {
  const json& gc = cfg.at("geometry");
  const std::string data_path = !data_flag.empty() ? data_flag : gc.value("data", "");
  const std::string betas_path =
      !betas_flag.empty() ? betas_flag : gc.value("betas", "");
  if (data_path.empty() || betas_path.empty()) {
    throw Error("usage", "geometry: --data and --betas are required");
  }
  PriorConfig prior = prior_from(cfg);
  LoadedCsv loaded = load_dataset_csv(data_path);
  const Dataset& data = loaded.data;

  std::ifstream in(betas_path);
  if (!in) throw Error("io", "cannot open " + betas_path);
  std::string line;
  if (!std::getline(in, line)) throw Error("io", "empty betas csv");
  std::vector<Eigen::VectorXd> betas;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto comma = line.find(',', start);
      const std::string tok =
          line.substr(start, comma == std::string::npos ? comma : comma - start);
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error("io", "betas csv: bad value '" + tok + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(vals.size()) != data.p()) {
      throw Error("dim", "betas csv row length does not match dataset");
    }
    betas.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  const GeometryReport rep =
      geometry_report(data, betas, prior.resolved_g(data.n()));

  json j;
  j["schema_version"] = 1;
  json pairs = json::array();
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    pairs.push_back({{"a", rep.pairs[i].first},
                     {"b", rep.pairs[i].second},
                     {"beta_space", rep.beta_space_dists[i]},
                     {"mean_space", rep.mean_space_dists[i]}});
  }
  j["pairs"] = pairs;
  j["ordering_flips"] = rep.ordering_flips;
  const std::string path = out_path(out_dir, "geometry.json");
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << j.dump(2) << "\n";
  std::cout << "wrote " << path << " (flips=" << rep.ordering_flips << ")\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"repulsive g-prior regression mixtures"};
  app.require_subcommand(1);
  app.allow_extras();

  std::string config_path, out_dir = ".", data_path, betas_path, method;
  long long seed_flag = -1;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed_flag, "seed override");
  app.add_option("--jobs", jobs, "concurrent replications (bench)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--data", data_path, "input data csv");
  app.add_option("--betas", betas_path, "coefficient csv (geometry)");
  app.add_option("--method", method, "sampler for fit: rgrm|rrm|mfm|sid");

  auto* sim = app.add_subcommand("simulate", "write a scenario dataset");
  auto* fit = app.add_subcommand("fit", "run one sampler on a csv");
  auto* bench = app.add_subcommand("bench", "replicated comparison study");
  auto* zk = app.add_subcommand("zk", "precompute the normalizing table");
  auto* geo = app.add_subcommand("geometry", "metric distortion report");
  for (auto* sc : {sim, fit, bench, zk, geo}) {
    sc->allow_extras();
    sc->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "repmix-error: "
              << json{{"kind", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  json cfg = default_config();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error("io", "cannot open config " + config_path);
    json user;
    try {
      in >> user;
    } catch (const json::exception& e) {
      throw Error("config", std::string("config parse: ") + e.what());
    }
    merge_into(cfg, user);
  }
  std::vector<std::string> extras = app.remaining();
  for (auto* sc : {sim, fit, bench, zk, geo}) {
    const auto more = sc->remaining();
    extras.insert(extras.end(), more.begin(), more.end());
  }
  apply_overrides(cfg, extras);
  if (jobs < 1) throw Error("usage", "--jobs must be positive");

  try {
    if (sim->parsed()) return cmd_simulate(cfg, out_dir, seed_flag);
    if (fit->parsed()) return cmd_fit(cfg, out_dir, data_path, method, seed_flag);
    if (bench->parsed()) return cmd_bench(cfg, out_dir, seed_flag, jobs);
    if (zk->parsed()) return cmd_zk(cfg, out_dir, data_path, seed_flag);
    return cmd_geometry(cfg, out_dir, data_path, betas_path);
  } catch (const json::exception& e) {
    throw Error("config", std::string("config value: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "repmix-error: "
              << json{{"kind", e.kind()}, {"message", e.what()}}.dump() << "\n";
    const std::string& k = e.kind();
    return (k == "usage" || k == "config" || k == "io" || k == "dim" ||
            k == "singular")
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::cerr << "repmix-error: "
              << json{{"kind", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
