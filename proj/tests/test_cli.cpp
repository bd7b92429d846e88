#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string repmix_bin() {
  const char* env = std::getenv("REPMIX_BIN");
  REQUIRE_MESSAGE(env != nullptr, "REPMIX_BIN must point at the cli binary");
  return env;
}

int run_cmd(const std::string& args) {
  const std::string cmd = repmix_bin() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes balanced labelled data and is byte deterministic") {
  TempDir a("repmix_cli_a"), b("repmix_cli_b");
  CHECK(run_cmd("simulate --seed 7 --out " + a.str() +
                " --simulate.scenario=s1 --simulate.n_per=25") == 0);
  CHECK(run_cmd("simulate --seed 7 --out " + b.str() +
                " --simulate.scenario=s1 --simulate.n_per=25") == 0);
  const std::string da = slurp(a.path / "data.csv");
  CHECK(da == slurp(b.path / "data.csv"));
  // 100 rows + header
  CHECK(std::count(da.begin(), da.end(), '\n') == 101);
  CHECK(da.rfind("x1,x2,x3,x4,y,z_true", 0) == 0);
}

TEST_CASE("toy scenario emits 3000 rows") {
  TempDir t("repmix_cli_toy");
  CHECK(run_cmd("simulate --seed 1 --out " + t.str() +
                " --simulate.scenario=toy") == 0);
  const std::string csv = slurp(t.path / "data.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3001);
}

TEST_CASE("missing input file exits 2 with an io error") {
  TempDir t("repmix_cli_miss");
  const std::string cmd = repmix_bin() + " fit --data " + t.str() +
                          "/nope.csv --out " + t.str() + " 2>" + t.str() +
                          "/err.txt >/dev/null";
  const int rc = WEXITSTATUS(std::system(cmd.c_str()));
  CHECK(rc == 2);
  const std::string err = slurp(t.path / "err.txt");
  CHECK(err.find("repmix-error") != std::string::npos);
  CHECK(err.find("\"kind\":\"io\"") != std::string::npos);
}

TEST_CASE("unknown method exits 2") {
  TempDir t("repmix_cli_method");
  CHECK(run_cmd("simulate --seed 3 --out " + t.str() +
                " --simulate.scenario=s1 --simulate.n_per=5") == 0);
  CHECK(run_cmd("fit --data " + t.str() + "/data.csv --method bogus --out " +
                t.str()) == 2);
  CHECK(run_cmd("bench --out " + t.str() +
                " --bench.methods='[\"bogus\"]' --bench.reps=2") == 2);
}

TEST_CASE("fit without truth column omits the agreement metrics") {
  TempDir t("repmix_cli_notruth");
  {
    std::ofstream out(t.path / "plain.csv");
    out << "x1,y\n";
    for (int i = 0; i < 30; ++i) {
      out << (1.0 + 0.1 * i) << "," << (0.5 * i) << "\n";
    }
  }
  CHECK(run_cmd("fit --data " + t.str() + "/plain.csv --method sid --out " +
                t.str() + " --chain.n_iter=40 --chain.burn_in=10 --sid.k_fit=4") == 0);
  const std::string rep = slurp(t.path / "report.csv");
  CHECK(rep.find(",ari,") == std::string::npos);
  CHECK(rep.find("purity") == std::string::npos);
  CHECK(rep.find("rmse") != std::string::npos);
}

TEST_CASE("config validation failure leaves no partial outputs") {
  TempDir t("repmix_cli_cfg");
  CHECK(run_cmd("simulate --seed 3 --out " + t.str() +
                " --simulate.scenario=s1 --simulate.n_per=5") == 0);
  fs::remove(t.path / "draws.jsonl");
  fs::remove(t.path / "report.csv");
  CHECK(run_cmd("fit --data " + t.str() + "/data.csv --out " + t.str() +
                " --prior.sigma2_lo=5 --prior.sigma2_hi=1") == 2);
  CHECK_FALSE(fs::exists(t.path / "draws.jsonl"));
  CHECK_FALSE(fs::exists(t.path / "report.csv"));
}

TEST_CASE("zk with k_max 1 keeps only the exact entry") {
  TempDir t("repmix_cli_zk");
  CHECK(run_cmd("simulate --seed 3 --out " + t.str() +
                " --simulate.scenario=s1 --simulate.n_per=5") == 0);
  CHECK(run_cmd("zk --data " + t.str() + "/data.csv --out " + t.str() +
                " --seed 4 --prior.k_max=1") == 0);
  const std::string zk = slurp(t.path / "zk.json");
  CHECK(zk.find("\"entries\": {}") != std::string::npos);
  CHECK(zk.find("schema_version") != std::string::npos);
}

TEST_CASE("zk without repulsion is exactly zero") {
  TempDir t("repmix_cli_zk0");
  CHECK(run_cmd("simulate --seed 3 --out " + t.str() +
                " --simulate.scenario=s1 --simulate.n_per=5") == 0);
  CHECK(run_cmd("zk --data " + t.str() + "/data.csv --out " + t.str() +
                " --seed 4 --zk.method=mfm --prior.k_max=6") == 0);
  const std::string zk = slurp(t.path / "zk.json");
  CHECK(zk.find("\"log_estimate\": 0.0") != std::string::npos);
  CHECK(zk.find("\"log_estimate\": -") == std::string::npos);
}

TEST_CASE("bench emits one row per method and reruns byte identically") {
  TempDir a("repmix_cli_bench_a"), b("repmix_cli_bench_b");
  const std::string common =
      " --seed 9 --bench.scenarios='[\"s1\"]' --bench.n_pers=[6]"
      " --bench.reps=2 --chain.n_iter=30 --chain.burn_in=10"
      " --chain.init=random --chain.init_k=6"
      " --prior.zk_samples=200 --prior.ztilde_samples=50";
  CHECK(run_cmd("bench --out " + a.str() + common + " --jobs 1") == 0);
  CHECK(run_cmd("bench --out " + b.str() + common + " --jobs 2") == 0);
  const std::string csv = slurp(a.path / "results.csv");
  CHECK(csv == slurp(b.path / "results.csv"));
  CHECK(slurp(a.path / "results.json") == slurp(b.path / "results.json"));
  // header + 5 method rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("fit rerun with one seed is byte identical") {
  TempDir t("repmix_cli_det");
  CHECK(run_cmd("simulate --seed 11 --out " + t.str() +
                " --simulate.scenario=s1 --simulate.n_per=8") == 0);
  const std::string fit_args = "fit --data " + t.str() + "/data.csv --method rgrm"
                               " --seed 5 --chain.n_iter=40 --chain.burn_in=10"
                               " --chain.init=random --chain.init_k=6"
                               " --prior.zk_samples=300 --prior.ztilde_samples=60";
  TempDir o1("repmix_cli_det1"), o2("repmix_cli_det2");
  CHECK(run_cmd(fit_args + " --out " + o1.str()) == 0);
  CHECK(run_cmd(fit_args + " --out " + o2.str()) == 0);
  CHECK(slurp(o1.path / "draws.jsonl") == slurp(o2.path / "draws.jsonl"));
  CHECK(slurp(o1.path / "report.csv") == slurp(o2.path / "report.csv"));
}

TEST_CASE("geometry command reports flips") {
  TempDir t("repmix_cli_geo");
  {
    std::ofstream data(t.path / "geo.csv");
    data << "x1,x2,y\n10,0,0\n0,0.1,0\n";
    std::ofstream betas(t.path / "betas.csv");
    betas << "b1,b2\n0,1\n0,-1\n0.2,1\n";
  }
  CHECK(run_cmd("geometry --data " + t.str() + "/geo.csv --betas " + t.str() +
                "/betas.csv --out " + t.str() + " --prior.g=1") == 0);
  const std::string geo = slurp(t.path / "geometry.json");
  CHECK(geo.find("ordering_flips") != std::string::npos);
  CHECK(geo.find("\"ordering_flips\": 0") == std::string::npos);
}

}
