#include "repmix/sid.hpp"

#include <cmath>
#include <limits>

#include "repmix/model.hpp"

namespace repmix {

void SidConfig::validate() const {
  if (k_fit < 1) throw Error("config", "sid: k_fit must be >= 1");
  if (!(alpha_total > 0.0)) throw Error("config", "sid: alpha_total must be positive");
  if (!(tau2 > 0.0)) throw Error("config", "sid: tau2 must be positive");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw Error("config", "sid: a0, b0 must be positive");
  if (!(eff_threshold > 0.0) || !(eff_threshold < 1.0)) {
    throw Error("config", "sid: eff_threshold must be in (0, 1)");
  }
}

Draws run_sid(const Dataset& data, const SidConfig& sid, const ChainConfig& cfg) {
  sid.validate();
  cfg.validate(data.n());
  const int n = data.n();
  const int p = data.p();
  const int kf = sid.k_fit;
  const double a_comp = sid.alpha_total / kf;

  std::mt19937_64 rng = make_engine(cfg.seed);

  std::vector<int> z(n);
  std::vector<Eigen::VectorXd> beta(kf, Eigen::VectorXd::Zero(p));
  std::vector<double> sigma2(kf, 1.0);
  std::vector<double> pi(kf, 1.0 / kf);

  if (cfg.init == ChainConfig::Init::Given) {
    for (int i = 0; i < n; ++i) {
      if (cfg.init_z[i] < 0 || cfg.init_z[i] >= kf) {
        throw Error("config", "sid: init_z label out of range");
      }
      z[i] = cfg.init_z[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      z[i] = std::min(kf - 1, static_cast<int>(runif(rng) * kf));
    }
  }

  Draws draws;
  draws.model_tag = "sid";
  draws.seed = cfg.seed;
  draws.n_iter = cfg.n_iter;
  draws.burn_in = cfg.burn_in;
  draws.thin = cfg.thin;
  draws.prior.tau2 = sid.tau2;
  draws.prior.a0 = sid.a0;
  draws.prior.b0 = sid.b0;
  draws.prior.k_max = kf;

  std::vector<int> counts(kf);
  std::vector<Eigen::MatrixXd> xtx(kf);
  std::vector<Eigen::VectorXd> xty(kf);
  std::vector<double> rss(kf);

  for (int it = 0; it < cfg.n_iter; ++it) {
    // weights | z
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) ++counts[z[i]];
    double total = 0.0;
    for (int k = 0; k < kf; ++k) {
      pi[k] = rgamma(rng, a_comp + counts[k], 1.0);
      total += pi[k];
    }
    for (int k = 0; k < kf; ++k) pi[k] /= total;

    // z | rest
    std::vector<double> log_pi(kf);
    for (int k = 0; k < kf; ++k) {
      log_pi[k] = pi[k] > 0.0 ? std::log(pi[k])
                              : -std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < n; ++i) {
      const auto xi = data.X.row(i);
      double best = -std::numeric_limits<double>::infinity();
      std::vector<double> lw(kf);
      for (int k = 0; k < kf; ++k) {
        lw[k] = log_pi[k] + log_normal_pdf(data.y(i), xi.dot(beta[k]), sigma2[k]);
        best = std::max(best, lw[k]);
      }
      if (best == -std::numeric_limits<double>::infinity()) {
        ++draws.diag.weight_underflows;
        z[i] = std::min(kf - 1, static_cast<int>(runif(rng) * kf));
        continue;
      }
      double sum = 0.0;
      for (int k = 0; k < kf; ++k) {
        lw[k] = std::exp(lw[k] - best);
        sum += lw[k];
      }
      double u = runif(rng) * sum;
      int pick = kf - 1;
      for (int k = 0; k < kf; ++k) {
        u -= lw[k];
        if (u <= 0.0) {
          pick = k;
          break;
        }
      }
      z[i] = pick;
    }

    // sufficient statistics
    for (int k = 0; k < kf; ++k) {
      xtx[k] = Eigen::MatrixXd::Zero(p, p);
      xty[k] = Eigen::VectorXd::Zero(p);
      rss[k] = 0.0;
      counts[k] = 0;
    }
    for (int i = 0; i < n; ++i) {
      const int k = z[i];
      const auto xi = data.X.row(i);
      xtx[k].noalias() += xi.transpose() * xi;
      xty[k].noalias() += xi.transpose() * data.y(i);
      ++counts[k];
    }

    // beta_k | rest with prior N(0, tau2 I)
    for (int k = 0; k < kf; ++k) {
      Eigen::MatrixXd prec = xtx[k] / sigma2[k] +
                             Eigen::MatrixXd::Identity(p, p) / sid.tau2;
      Eigen::MatrixXd L = spd_cholesky(prec);
      Eigen::VectorXd rhs = xty[k] / sigma2[k];
      Eigen::VectorXd tmp = L.triangularView<Eigen::Lower>().solve(rhs);
      Eigen::VectorXd mean = L.transpose().triangularView<Eigen::Upper>().solve(tmp);
      Eigen::VectorXd zv(p);
      for (int j = 0; j < p; ++j) zv(j) = rnorm(rng);
      beta[k] = mean + L.transpose().triangularView<Eigen::Upper>().solve(zv);
    }

    // sigma2_k | rest, untruncated
    for (int i = 0; i < n; ++i) {
      const int k = z[i];
      const double r = data.y(i) - data.X.row(i).dot(beta[k]);
      rss[k] += r * r;
    }
    for (int k = 0; k < kf; ++k) {
      const double shape = sid.a0 + 0.5 * counts[k];
      const double rate = sid.b0 + 0.5 * rss[k];
      sigma2[k] = 1.0 / rgamma(rng, shape, 1.0 / rate);
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      DrawRecord rec;
      rec.z = z;
      rec.k_total = kf;
      rec.weights = pi;
      for (int k = 0; k < kf; ++k) {
        rec.comp_ids.push_back(k);
        rec.betas.push_back(beta[k]);
        rec.sigma2s.push_back(sigma2[k]);
      }
      draws.states.push_back(std::move(rec));
    }
  }
  return draws;
}

}  // namespace repmix
