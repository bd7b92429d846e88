#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace testutil {

// Composite Simpson with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Unnormalized InverseGamma(shape, rate) density.
inline double invgamma_kernel(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return std::pow(x, -shape - 1.0) * std::exp(-rate / x);
}

inline double invgamma_pdf(double x, double shape, double rate) {
  return invgamma_kernel(x, shape, rate) * std::pow(rate, shape) /
         std::tgamma(shape);
}

// Pair-counting adjusted Rand index, straight from the definition.
inline double ari_bruteforce(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      if (sa && sb) ++n11;
      else if (!sa && !sb) ++n00;
      else if (sa) ++n10;
      else ++n01;
    }
  }
  const double total = n11 + n00 + n10 + n01;
  const double expected = (n11 + n10) * (n11 + n01) / total;
  const double maximum = 0.5 * ((n11 + n10) + (n11 + n01));
  if (std::abs(maximum - expected) < 1e-12) {
    return (n10 + n01) == 0 ? 1.0 : 0.0;
  }
  return (n11 - expected) / (maximum - expected);
}

inline double purity_bruteforce(const std::vector<int>& pred,
                                const std::vector<int>& truth) {
  std::map<int, std::map<int, int>> overlap;
  for (std::size_t i = 0; i < pred.size(); ++i) ++overlap[pred[i]][truth[i]];
  double hit = 0.0;
  for (const auto& [p, row] : overlap) {
    int best = 0;
    for (const auto& [t, c] : row) best = std::max(best, c);
    hit += best;
  }
  return hit / pred.size();
}

// Survival function of chi-squared with df degrees of freedom.
inline double chi2_sf(double stat, int df) {
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

// Two-sample chi-squared homogeneity p-value over count vectors.
inline double chi2_two_sample_p(const std::vector<double>& o1,
                                const std::vector<double>& o2) {
  double s1 = 0, s2 = 0;
  for (double v : o1) s1 += v;
  for (double v : o2) s2 += v;
  const double r = std::sqrt(s2 / s1), rinv = std::sqrt(s1 / s2);
  double stat = 0.0;
  int df = -1;
  for (std::size_t i = 0; i < o1.size(); ++i) {
    if (o1[i] + o2[i] == 0.0) continue;
    const double d = o1[i] * r - o2[i] * rinv;
    stat += d * d / (o1[i] + o2[i]);
    ++df;
  }
  return df <= 0 ? 1.0 : chi2_sf(stat, df);
}

// Goodness-of-fit chi-squared p-value of observed counts vs probabilities.
inline double chi2_gof_p(const std::vector<double>& obs,
                         const std::vector<double>& prob) {
  double n = 0.0;
  for (double v : obs) n += v;
  double stat = 0.0;
  int df = -1;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double e = n * prob[i];
    if (e < 1e-12) continue;
    stat += (obs[i] - e) * (obs[i] - e) / e;
    ++df;
  }
  return df <= 0 ? 1.0 : chi2_sf(stat, df);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

// Standard error of the mean by batch means (handles autocorrelation).
inline double batch_se(const std::vector<double>& v, int batches = 100) {
  const int bs = static_cast<int>(v.size()) / batches;
  std::vector<double> bm(batches);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int i = 0; i < bs; ++i) s += v[b * bs + i];
    bm[b] = s / bs;
  }
  return std::sqrt(var_of(bm) / batches);
}

}  // namespace testutil
