#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "repmix/error.hpp"
#include "repmix/metrics.hpp"
#include "repmix/rng.hpp"
#include "testutil.hpp"

using namespace repmix;

namespace {

DrawRecord record_from(const std::vector<int>& z) {
  DrawRecord rec;
  rec.z = z;
  std::vector<int> labels(z);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (int lbl : labels) {
    rec.comp_ids.push_back(lbl);
    Eigen::VectorXd b(1);
    b << static_cast<double>(lbl);
    rec.betas.push_back(b);
    rec.sigma2s.push_back(1.0);
  }
  rec.k_total = static_cast<int>(labels.size());
  return rec;
}

Draws draws_from(const std::vector<std::vector<int>>& zs) {
  Draws d;
  for (const auto& z : zs) d.states.push_back(record_from(z));
  return d;
}

std::vector<int> random_partition(std::mt19937_64& rng, int n, int k) {
  std::vector<int> z(n);
  for (int i = 0; i < n; ++i) z[i] = static_cast<int>(runif(rng) * k) + 1;
  return z;
}

// n x n boolean co-assignment signature
std::vector<bool> coassign_of(const std::vector<int>& z) {
  const int n = static_cast<int>(z.size());
  std::vector<bool> c;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.push_back(z[i] == z[j]);
  return c;
}

double mean_pairwise_agreement(const Draws& d) {
  double total = 0.0;
  int cnt = 0;
  for (std::size_t a = 0; a < d.states.size(); ++a) {
    for (std::size_t b = a + 1; b < d.states.size(); ++b) {
      int same = 0;
      for (std::size_t i = 0; i < d.states[a].z.size(); ++i) {
        same += d.states[a].z[i] == d.states[b].z[i];
      }
      total += static_cast<double>(same) / d.states[a].z.size();
      ++cnt;
    }
  }
  return cnt ? total / cnt : 1.0;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("assignment solver agrees with permutation brute force") {
  std::mt19937_64 rng = make_engine(3);
  for (int rep = 0; rep < 60; ++rep) {
    const int r = 2 + static_cast<int>(runif(rng) * 4);
    const int c = 2 + static_cast<int>(runif(rng) * 4);
    Eigen::MatrixXd score(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) score(i, j) = std::floor(runif(rng) * 20.0);
    const std::vector<int> match = max_assignment(score);
    double got = 0.0;
    for (int i = 0; i < r; ++i) {
      if (match[i] >= 0) got += score(i, match[i]);
    }
    // brute force over column permutations of the padded square problem
    const int m = std::max(r, c);
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    double best = -1.0;
    do {
      double s = 0.0;
      for (int i = 0; i < r; ++i) {
        if (perm[i] < c) s += score(i, perm[i]);
      }
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best));
  }
}

TEST_CASE("relabeling identical draws is a fixed point") {
  const Draws d = draws_from({{1, 1, 2, 2, 3}, {1, 1, 2, 2, 3}, {1, 1, 2, 2, 3}});
  const Draws out = relabel_draws(d);
  for (const auto& rec : out.states) {
    CHECK(rec.z == std::vector<int>{1, 1, 2, 2, 3});
  }
}

TEST_CASE("a label swap is undone") {
  const Draws d = draws_from({{1, 1, 2, 2}, {2, 2, 1, 1}});
  const Draws out = relabel_draws(d);
  CHECK(out.states[0].z == out.states[1].z);
}

TEST_CASE("relabeling never changes partition structure and raises agreement") {
  std::mt19937_64 rng = make_engine(7);
  std::vector<std::vector<int>> zs;
  const std::vector<int> base{1, 1, 1, 2, 2, 2, 3, 3, 3, 1, 2, 3};
  for (int t = 0; t < 20; ++t) {
    std::vector<int> z = base;
    // random relabel plus a little noise
    std::vector<int> perm{1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int& v : z) v = perm[v - 1];
    if (t % 3 == 0) z[static_cast<int>(runif(rng) * z.size())] = 1;
    zs.push_back(z);
  }
  const Draws d = draws_from(zs);
  const Draws out = relabel_draws(d);
  for (std::size_t s = 0; s < d.states.size(); ++s) {
    CHECK(coassign_of(d.states[s].z) == coassign_of(out.states[s].z));
  }
  CHECK(mean_pairwise_agreement(out) > mean_pairwise_agreement(d));
}

TEST_CASE("point assignments") {
  SUBCASE("single draw") {
    const Draws d = draws_from({{2, 1, 1}});
    CHECK(point_assignments(d) == std::vector<int>{2, 1, 1});
  }
  SUBCASE("majority and tie rule") {
    const Draws d = draws_from({{1, 1}, {1, 2}, {2, 2}, {2, 1}});
    // obs 0: 1,1,2,2 -> tie -> 1; obs 1: 1,2,2,1 -> tie -> 1
    CHECK(point_assignments(d) == std::vector<int>{1, 1});
    const Draws e = draws_from({{1, 1}, {1, 2}, {2, 2}});
    CHECK(point_assignments(e) == std::vector<int>{1, 2});
  }
}

TEST_CASE("adjusted rand index basics") {
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {5, 5, 9, 9}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 1}, {2, 2, 2}) == doctest::Approx(1.0));
  const double v = adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2});
  CHECK(v == doctest::Approx(testutil::ari_bruteforce({1, 1, 2, 2}, {1, 2, 1, 2})));
  CHECK_THROWS_AS(adjusted_rand_index({1, 2}, {1, 2, 3}), Error);
}

TEST_CASE("adjusted rand index equals pair counting on random partitions") {
  std::mt19937_64 rng = make_engine(15);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(runif(rng) * 11);
    const int ka = 1 + static_cast<int>(runif(rng) * 4);
    const int kb = 1 + static_cast<int>(runif(rng) * 4);
    const auto a = random_partition(rng, n, ka);
    const auto b = random_partition(rng, n, kb);
    CHECK(adjusted_rand_index(a, b) ==
          doctest::Approx(testutil::ari_bruteforce(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("purity examples and brute force") {
  CHECK(purity({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(purity({1, 1, 1, 1}, {1, 1, 2, 2}) == doctest::Approx(0.5));
  CHECK(purity({1, 1, 1, 1, 1, 1}, {1, 1, 2, 2, 3, 3}) ==
        doctest::Approx(1.0 / 3.0));
  std::mt19937_64 rng = make_engine(19);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(runif(rng) * 11);
    const auto a = random_partition(rng, n, 4);
    const auto b = random_partition(rng, n, 3);
    CHECK(purity(a, b) == doctest::Approx(testutil::purity_bruteforce(a, b)));
  }
}

TEST_CASE("metrics are invariant under relabeling either side") {
  std::mt19937_64 rng = make_engine(23);
  const auto a = random_partition(rng, 30, 4);
  const auto b = random_partition(rng, 30, 3);
  auto relab = [](const std::vector<int>& z, int shift) {
    std::vector<int> out(z);
    for (int& v : out) v = (v * 7 + shift) % 101;
    return out;
  };
  CHECK(adjusted_rand_index(relab(a, 13), relab(b, 41)) ==
        doctest::Approx(adjusted_rand_index(a, b)));
  CHECK(purity(relab(a, 13), relab(b, 41)) == doctest::Approx(purity(a, b)));
}

TEST_CASE("post-hoc refit error") {
  std::mt19937_64 rng = make_engine(27);
  const int n = 24;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = runif(rng) * 3.0;
  }

  SUBCASE("exact linear fit gives zero") {
    for (int i = 0; i < n; ++i) y(i) = 2.0 - 3.0 * X(i, 1);
    const Dataset d = build_dataset(X, y);
    CHECK(rmse_posthoc(d, std::vector<int>(n, 1)) < 1e-9);
  }

  SUBCASE("two-line data recovers the noise level under true labels") {
    std::vector<int> z(n);
    for (int i = 0; i < n; ++i) {
      const double slope = i % 2 ? 4.0 : -4.0;
      y(i) = slope * X(i, 1) + rnorm(rng);
      z[i] = i % 2;
    }
    const Dataset d = build_dataset(X, y);
    const double r = rmse_posthoc(d, z);
    CHECK(r > 0.5);
    CHECK(r < 1.4);
  }

  SUBCASE("tiny cluster falls back to ridge and stays finite") {
    for (int i = 0; i < n; ++i) y(i) = X(i, 1) + 0.1;
    std::vector<int> z(n, 1);
    z[0] = 7;  // cluster of size 1 with p = 2
    const Dataset d = build_dataset(X, y);
    const double r = rmse_posthoc(d, z);
    CHECK(std::isfinite(r));
  }

  SUBCASE("invariant to permuting cluster ids") {
    std::vector<int> z(n);
    for (int i = 0; i < n; ++i) {
      y(i) = (i % 3) * X(i, 1) + rnorm(rng);
      z[i] = i % 3;
    }
    const Dataset d = build_dataset(X, y);
    std::vector<int> zp(n);
    for (int i = 0; i < n; ++i) zp[i] = (z[i] * 11 + 5) % 17;
    CHECK(rmse_posthoc(d, z) == doctest::Approx(rmse_posthoc(d, zp)));
  }
}

TEST_CASE("k hat on occupied counts") {
  const Draws d =
      draws_from({{1, 1, 2, 3}, {1, 2, 2, 3}, {1, 1, 1, 2}, {1, 2, 3, 4}});
  const KHat kh = k_hat(d);
  CHECK(kh.mean == doctest::Approx((3 + 3 + 2 + 4) / 4.0));
  CHECK(kh.mode == 3);
  const Draws all4 = draws_from({{1, 2, 3, 4}, {4, 3, 2, 1}});
  CHECK(k_hat(all4).mean == doctest::Approx(4.0));
  CHECK(k_hat(all4).mode == 4);
}

}
