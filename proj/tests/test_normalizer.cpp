#include <doctest.h>

#include <cmath>

#include "repmix/normalizer.hpp"
#include "repmix/rng.hpp"
#include "testutil.hpp"

using namespace repmix;

namespace {

// p = 1 dataset with gram exactly [[1]].
Dataset unit_gram_dataset() {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  Eigen::VectorXd y(1);
  y << 0.0;
  return build_dataset(X, y);
}

PriorConfig pinned_sigma_prior() {
  PriorConfig pr;
  pr.g = 1.0;
  pr.g0 = 1.0;
  // pin sigma^2 ~ 1 through a narrow truncation window
  pr.sigma2_lo = 1.0 - 1e-6;
  pr.sigma2_hi = 1.0 + 1e-6;
  pr.zk_samples = 40000;
  pr.k_max = 3;
  return pr;
}

}  // namespace

TEST_SUITE("normalizer") {

TEST_CASE("K = 1 is exact") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  const ZkEntry e = estimate_zk(1, d, pr, BetaPriorKind::GPrior, kernel, 7);
  CHECK(e.log_estimate == 0.0);
  CHECK(e.mc_std_error == 0.0);
}

TEST_CASE("kernel none is exact for any K") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  for (int k : {2, 5, 9}) {
    const ZkEntry e =
        estimate_zk(k, d, pr, BetaPriorKind::GPrior, RepulsionKernel::none(), 7);
    CHECK(e.log_estimate == 0.0);
    CHECK(e.mc_std_error == 0.0);
  }
}

TEST_CASE("K = 2 unit-gram estimate matches chi-square quadrature") {
  // beta_k ~ N(0, 1), d = (b1 - b2)^2 = 2u with u ~ chi2_1;
  // E[G(d)] = int G(2u) chi2_1(u) du.
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  const ZkEntry e = estimate_zk(2, d, pr, BetaPriorKind::GPrior, kernel, 123);

  const double oracle = testutil::simpson(
      [](double u) {
        if (u <= 0.0) return 0.0;
        const double g = 2.0 * u / (2.0 * u + 1.0);
        const double chi1 = std::exp(-0.5 * u) / std::sqrt(2.0 * std::numbers::pi * u);
        return g * chi1;
      },
      1e-9, 60.0, 40000);
  CHECK(std::abs(std::exp(e.log_estimate) - oracle) <
        3.0 * e.mc_std_error * std::exp(e.log_estimate));
}

TEST_CASE("estimates are deterministic in the seed") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  pr.zk_samples = 5000;
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  const ZkEntry a = estimate_zk(3, d, pr, BetaPriorKind::GPrior, kernel, 99);
  const ZkEntry b = estimate_zk(3, d, pr, BetaPriorKind::GPrior, kernel, 99);
  const ZkEntry c = estimate_zk(3, d, pr, BetaPriorKind::GPrior, kernel, 100);
  CHECK(a.log_estimate == b.log_estimate);
  CHECK(a.mc_std_error == b.mc_std_error);
  CHECK(a.log_estimate != c.log_estimate);
}

TEST_CASE("table is monotone within Monte Carlo error") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  pr.k_max = 8;
  pr.zk_samples = 8000;
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  const ZkTable t = build_zk_table(d, pr, BetaPriorKind::GPrior, kernel, 17);
  double prev = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const double cur = t.log_zk(k);
    CHECK(cur <= prev + 4.0 * (t.std_error(k) + (k > 2 ? t.std_error(k - 1) : 0.0)));
    CHECK(cur <= 0.0);
    prev = cur;
  }
}

TEST_CASE("ztilde shortcuts") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  MixtureState st(1, 1);
  const int id = st.add_component({Eigen::VectorXd::Zero(1), 1.0});
  st.assign(0, id);
  CHECK(estimate_ztilde(st, d, pr, BetaPriorKind::GPrior,
                        RepulsionKernel::none(), 4, 5) == 0.0);
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  CHECK(estimate_ztilde(st, d, pr, BetaPriorKind::GPrior, kernel, 1, 5) == 0.0);
  CHECK_THROWS_AS(estimate_ztilde(st, d, pr, BetaPriorKind::GPrior, kernel, 0, 5),
                  Error);
}

TEST_CASE("ztilde matches 2-D posterior-by-prior quadrature") {
  // n = 5, p = 1, one occupied cluster, K = 2, sigma^2 pinned at 1.
  Eigen::MatrixXd X(5, 1);
  X << 0.8, -0.3, 1.4, 0.5, -1.1;
  Eigen::VectorXd y(5);
  y << 1.1, -0.2, 1.9, 0.4, -1.6;
  const Dataset d = build_dataset(X, y);

  PriorConfig pr;
  pr.g = 2.0;
  pr.g0 = 1.0;
  pr.sigma2_lo = 1.0 - 1e-6;
  pr.sigma2_hi = 1.0 + 1e-6;
  pr.ztilde_samples = 20000;

  MixtureState st(5, 1);
  Eigen::VectorXd beta_state(1);
  beta_state << 1.0;
  const int id = st.add_component({beta_state, 1.0});
  for (int i = 0; i < 5; ++i) st.assign(i, id);

  const auto kernel = RepulsionKernel::mahalanobis(d.gram, pr.g, pr.g0);

  // occupied conditional at sigma^2 = 1: N(vm, v), v = (xtx + gram/g)^{-1}
  const double xtx = d.gram(0, 0);
  const double xty = (X.transpose() * y)(0);
  const double v = 1.0 / (xtx + xtx / pr.g);
  const double m = v * xty;
  // empty slot prior: N(0, g / gram)
  const double vp = pr.g / d.gram(0, 0);
  const double gram = d.gram(0, 0);
  const double g = pr.g;
  const auto integrand = [&](double bc, double be) {
    const double dist = (bc - be) * (bc - be) * gram / g;
    return (dist / (dist + 1.0)) * testutil::normal_pdf(bc, m, v) *
           testutil::normal_pdf(be, 0.0, vp);
  };
  // nested Simpson over +-8 sd boxes
  const double lo_c = m - 8.0 * std::sqrt(v), hi_c = m + 8.0 * std::sqrt(v);
  const double lo_e = -8.0 * std::sqrt(vp), hi_e = 8.0 * std::sqrt(vp);
  const double oracle = testutil::simpson(
      [&](double bc) {
        return testutil::simpson([&](double be) { return integrand(bc, be); },
                                 lo_e, hi_e, 400);
      },
      lo_c, hi_c, 400);

  // repeated estimates give the MC standard error of the estimator
  std::vector<double> ests;
  for (int r = 0; r < 12; ++r) {
    ests.push_back(std::exp(estimate_ztilde(st, d, pr, BetaPriorKind::GPrior,
                                            kernel, 2, 1000 + r)));
  }
  const double mean = testutil::mean_of(ests);
  const double se = std::sqrt(testutil::var_of(ests) / ests.size());
  CHECK(std::abs(mean - oracle) < 3.0 * se);
}

TEST_CASE("theorem-1 diagnostic") {
  ZkTable t;
  t.k_max = 4;
  SUBCASE("trivial table") {
    for (int k = 2; k <= 4; ++k) t.entries[k] = ZkEntry{0.0, 0.0, 100};
    const auto diag = theorem1_diagnostic(t);
    CHECK(diag.c1_hat == 0.0);
    CHECK(diag.bound_ok);
  }
  SUBCASE("ratios and violations") {
    t.entries[2] = ZkEntry{-0.4, 0.01, 100};
    t.entries[3] = ZkEntry{-0.9, 0.01, 100};
    t.entries[4] = ZkEntry{0.05, 0.01, 100};  // above 2 se: flagged
    const auto diag = theorem1_diagnostic(t);
    CHECK(diag.c1_hat == doctest::Approx(0.3));
    CHECK_FALSE(diag.bound_ok);
    CHECK(diag.violations == 1);
    CHECK(diag.per_k_ratios.size() == 3);
  }
}

TEST_CASE("zk table persists and reloads by key hash") {
  const Dataset d = unit_gram_dataset();
  PriorConfig pr = pinned_sigma_prior();
  pr.k_max = 3;
  pr.zk_samples = 2000;
  const auto kernel = RepulsionKernel::mahalanobis(d.gram, 1.0, 1.0);
  const ZkTable t = build_zk_table(d, pr, BetaPriorKind::GPrior, kernel, 7);
  const std::string path = "test_zk_tmp.json";
  save_zk_table(path, t, nullptr);
  ZkTable back;
  REQUIRE(load_zk_table(path, t.key_hash, &back));
  CHECK(back.entries.at(2).log_estimate == t.entries.at(2).log_estimate);
  CHECK(back.entries.at(3).mc_std_error == t.entries.at(3).mc_std_error);
  ZkTable miss;
  CHECK_FALSE(load_zk_table(path, t.key_hash + 1, &miss));
  std::remove(path.c_str());
}

}
