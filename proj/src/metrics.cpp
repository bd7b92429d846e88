#include "repmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "repmix/error.hpp"

namespace repmix {

namespace {

// Hungarian algorithm (potentials form) on a square cost matrix.
// Returns row -> column of the minimum-cost perfect matching.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0);  // column -> row (1-based)
  std::vector<int> way(m + 1, 0);
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(m, -1);
  for (int j = 1; j <= m; ++j) {
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<int> sorted_labels(const std::vector<int>& z) {
  std::vector<int> u(z);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

// n_ab contingency between two labelings over shared indices.
Eigen::MatrixXd contingency(const std::vector<int>& a, const std::vector<int>& b,
                            const std::vector<int>& ula, const std::vector<int>& ulb) {
  std::unordered_map<int, int> ia, ib;
  for (std::size_t i = 0; i < ula.size(); ++i) ia[ula[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < ulb.size(); ++i) ib[ulb[i]] = static_cast<int>(i);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ula.size(), ulb.size());
  for (std::size_t i = 0; i < a.size(); ++i) m(ia[a[i]], ib[b[i]]) += 1.0;
  return m;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::unordered_map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto f = fwd.find(a[i]);
    auto g = bwd.find(b[i]);
    if (f == fwd.end() && g == bwd.end()) {
      fwd[a[i]] = b[i];
      bwd[b[i]] = a[i];
    } else if (f == fwd.end() || g == bwd.end() || f->second != b[i] ||
               g->second != a[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<int> max_assignment(const Eigen::MatrixXd& score) {
  const int r = static_cast<int>(score.rows());
  const int c = static_cast<int>(score.cols());
  const int m = std::max(r, c);
  const double top = r * c > 0 ? score.maxCoeff() : 0.0;
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(m, m, top);
  cost.topLeftCorner(r, c) = (top - score.array()).matrix();
  std::vector<int> match = hungarian_min(cost);
  match.resize(r);
  for (int i = 0; i < r; ++i) {
    if (match[i] >= c) match[i] = -1;  // padded column: unmatched
  }
  return match;
}

Draws relabel_draws(const Draws& draws) {
  if (draws.states.empty()) throw Error("domain", "relabel_draws: no draws");
  const int d = static_cast<int>(draws.states.size());
  const int n = static_cast<int>(draws.states[0].z.size());

  // Reference selection on a deterministic observation subsample.
  std::vector<int> sub;
  const int stride = std::max(1, (n + 1023) / 1024);
  for (int i = 0; i < n; i += stride) sub.push_back(i);
  const int ns = static_cast<int>(sub.size());

  Eigen::MatrixXf coassign = Eigen::MatrixXf::Zero(ns, ns);
  std::unordered_map<int, std::vector<int>> members;
  for (const auto& rec : draws.states) {
    members.clear();
    for (int s = 0; s < ns; ++s) members[rec.z[sub[s]]].push_back(s);
    for (const auto& [lbl, idx] : members) {
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
          coassign(idx[a], idx[b]) += 1.0f;
        }
      }
    }
  }
  coassign /= static_cast<float>(d);

  int ref = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < d; ++t) {
    members.clear();
    for (int s = 0; s < ns; ++s) members[draws.states[t].z[sub[s]]].push_back(s);
    double score = 0.0;
    for (const auto& [lbl, idx] : members) {
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
          score += 2.0 * coassign(idx[a], idx[b]) - 1.0;
        }
      }
    }
    if (score > best_score) {
      best_score = score;
      ref = t;
    }
  }

  const std::vector<int>& zref = draws.states[ref].z;
  const std::vector<int> ref_labels = sorted_labels(zref);

  Draws out = draws;
  for (auto& rec : out.states) {
    const std::vector<int> labels = sorted_labels(rec.z);
    const Eigen::MatrixXd table = contingency(rec.z, zref, labels, ref_labels);
    const std::vector<int> match = max_assignment(table);

    std::unordered_map<int, int> remap;
    std::set<int> used;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      if (match[a] >= 0) {
        remap[labels[a]] = ref_labels[match[a]];
        used.insert(ref_labels[match[a]]);
      }
    }
    int fresh = ref_labels.empty() ? 0 : ref_labels.back() + 1;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      if (match[a] < 0) {
        while (used.count(fresh)) ++fresh;
        remap[labels[a]] = fresh;
        used.insert(fresh);
      }
    }
    // Components never assigned (empty slots) also need target ids.
    for (int id : rec.comp_ids) {
      if (!remap.count(id)) {
        while (used.count(fresh)) ++fresh;
        remap[id] = fresh;
        used.insert(fresh);
      }
    }

    for (int& zi : rec.z) zi = remap[zi];
    // Rebuild component arrays in ascending new-id order.
    std::vector<std::pair<int, int>> order;  // (new id, old position)
    for (std::size_t c = 0; c < rec.comp_ids.size(); ++c) {
      order.emplace_back(remap[rec.comp_ids[c]], static_cast<int>(c));
    }
    std::sort(order.begin(), order.end());
    DrawRecord next;
    next.z = rec.z;
    next.k_total = rec.k_total;
    if (!rec.weights.empty()) next.weights.resize(rec.weights.size());
    for (const auto& [nid, pos] : order) {
      next.comp_ids.push_back(nid);
      next.betas.push_back(rec.betas[pos]);
      next.sigma2s.push_back(rec.sigma2s[pos]);
      if (!rec.weights.empty()) {
        next.weights[next.comp_ids.size() - 1] = rec.weights[pos];
      }
    }
    rec = std::move(next);
  }
  return out;
}

std::vector<int> point_assignments(const Draws& draws) {
  if (draws.states.empty()) throw Error("domain", "point_assignments: no draws");
  const int n = static_cast<int>(draws.states[0].z.size());
  std::vector<int> z_hat(n);
  std::map<int, int> freq;
  for (int i = 0; i < n; ++i) {
    freq.clear();
    for (const auto& rec : draws.states) ++freq[rec.z[i]];
    int best_label = -1, best_count = -1;
    for (const auto& [lbl, cnt] : freq) {
      if (cnt > best_count) {  // map order: ties keep the smaller label
        best_count = cnt;
        best_label = lbl;
      }
    }
    z_hat[i] = best_label;
  }
  return z_hat;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error("dim", "ari: length mismatch");
  const auto ula = sorted_labels(a);
  const auto ulb = sorted_labels(b);
  const Eigen::MatrixXd m = contingency(a, b, ula, ulb);
  auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  double sum_cells = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) sum_cells += choose2(m(i, j));
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (int i = 0; i < m.rows(); ++i) sum_rows += choose2(m.row(i).sum());
  for (int j = 0; j < m.cols(); ++j) sum_cols += choose2(m.col(j).sum());
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (std::abs(denom) < 1e-12) {
    return same_partition(a, b) ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / denom;
}

double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw Error("dim", "purity: length mismatch");
  if (pred.empty()) throw Error("dim", "purity: empty partitions");
  const auto ulp = sorted_labels(pred);
  const auto ult = sorted_labels(truth);
  const Eigen::MatrixXd m = contingency(pred, truth, ulp, ult);
  double hit = 0.0;
  for (int i = 0; i < m.rows(); ++i) hit += m.row(i).maxCoeff();
  return hit / static_cast<double>(pred.size());
}

double rmse_posthoc(const Dataset& data, const std::vector<int>& z_hat) {
  const int n = data.n();
  const int p = data.p();
  if (static_cast<int>(z_hat.size()) != n) {
    throw Error("dim", "rmse_posthoc: z_hat length mismatch");
  }
  const double ridge = 1e-6 * data.gram.trace() / p;
  double sse = 0.0;
  for (int lbl : sorted_labels(z_hat)) {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
    int cnt = 0;
    for (int i = 0; i < n; ++i) {
      if (z_hat[i] != lbl) continue;
      const auto xi = data.X.row(i);
      xtx.noalias() += xi.transpose() * xi;
      xty.noalias() += xi.transpose() * data.y(i);
      ++cnt;
    }
    Eigen::VectorXd coef;
    bool solved = false;
    if (cnt >= p + 1) {
      try {
        Eigen::MatrixXd L = spd_cholesky(xtx);
        Eigen::VectorXd tmp = L.triangularView<Eigen::Lower>().solve(xty);
        coef = L.transpose().triangularView<Eigen::Upper>().solve(tmp);
        solved = true;
      } catch (const Error&) {
        solved = false;
      }
    }
    if (!solved) {
      Eigen::MatrixXd L =
          spd_cholesky(xtx + ridge * Eigen::MatrixXd::Identity(p, p));
      Eigen::VectorXd tmp = L.triangularView<Eigen::Lower>().solve(xty);
      coef = L.transpose().triangularView<Eigen::Upper>().solve(tmp);
    }
    for (int i = 0; i < n; ++i) {
      if (z_hat[i] != lbl) continue;
      const double r = data.y(i) - data.X.row(i).dot(coef);
      sse += r * r;
    }
  }
  return std::sqrt(sse / n);
}

double rmse_draw_based(const Dataset& data, const Draws& relabeled,
                       const std::vector<int>& z_hat) {
  const int n = data.n();
  if (static_cast<int>(z_hat.size()) != n) {
    throw Error("dim", "rmse_draw_based: z_hat length mismatch");
  }
  std::map<int, Eigen::VectorXd> sum;
  std::map<int, int> cnt;
  for (const auto& rec : relabeled.states) {
    for (std::size_t c = 0; c < rec.comp_ids.size(); ++c) {
      const int id = rec.comp_ids[c];
      auto it = sum.find(id);
      if (it == sum.end()) {
        sum[id] = rec.betas[c];
        cnt[id] = 1;
      } else {
        it->second += rec.betas[c];
        ++cnt[id];
      }
    }
  }
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    auto it = sum.find(z_hat[i]);
    if (it == sum.end()) {
      throw Error("domain", "rmse_draw_based: label never sampled");
    }
    const Eigen::VectorXd mean = it->second / cnt[z_hat[i]];
    const double r = data.y(i) - data.X.row(i).dot(mean);
    sse += r * r;
  }
  return std::sqrt(sse / n);
}

KHat k_hat(const Draws& draws, double eff_threshold) {
  if (draws.states.empty()) throw Error("domain", "k_hat: no draws");
  std::map<int, int> freq;
  double total = 0.0;
  for (const auto& rec : draws.states) {
    int k;
    if (!rec.weights.empty()) {
      k = 0;
      for (double w : rec.weights) {
        if (w > eff_threshold) ++k;
      }
    } else {
      k = rec.occupied_count();
    }
    ++freq[k];
    total += k;
  }
  KHat out;
  out.mean = total / static_cast<double>(draws.states.size());
  int best = -1;
  for (const auto& [k, c] : freq) {
    if (c > best) {  // ties keep the smaller k (map order)
      best = c;
      out.mode = k;
    }
  }
  return out;
}

EvalReport evaluate(const Dataset& data, const Draws& relabeled,
                    const std::vector<int>* truth, double eff_threshold,
                    bool rmse_ols_refit) {
  EvalReport r;
  r.n = data.n();
  const std::vector<int> z_hat = point_assignments(relabeled);
  const KHat kh = k_hat(relabeled, eff_threshold);
  r.k_hat_mean = kh.mean;
  r.k_hat_mode = kh.mode;
  r.rmse = rmse_ols_refit ? rmse_posthoc(data, z_hat)
                          : rmse_draw_based(data, relabeled, z_hat);
  if (truth) {
    r.has_truth = true;
    r.ari = adjusted_rand_index(z_hat, *truth);
    r.purity = purity(z_hat, *truth);
  }
  return r;
}

}  // namespace repmix
