#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace repmix {

// SplitMix64 output function; also whitens user seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combiner for deriving substream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + splitmix64(b)));
}

std::uint64_t fnv1a(const void* data, std::size_t len);

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

// Counter-based generator: one cheap stream per Monte Carlo draw index, so
// reductions are reproducible under any parallel schedule.
class SmallRng {
 public:
  using result_type = std::uint64_t;
  explicit SmallRng(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }
  result_type operator()() { return splitmix64(state_++); }

 private:
  std::uint64_t state_;
};

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

template <class G>
double runif(G& g) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

template <class G>
double rnorm(G& g) {
  return std::normal_distribution<double>(0.0, 1.0)(g);
}

template <class G>
double rgamma(G& g, double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(g);
}

// CDF / quantile of InverseGamma(shape, rate); implemented with the
// regularized incomplete gamma functions.
double invgamma_cdf(double shape, double rate, double x);
double invgamma_quantile(double shape, double rate, double p);

// Exact draw from InverseGamma(shape, rate) restricted to [lo, hi].
// Plain rejection first (near-free when the interval holds most mass),
// inverse-CDF afterwards.  When the interval mass is below 1e-12 the draw
// is clamped to the nearest bound and *clamped is set.
template <class G>
double rtrunc_invgamma(G& g, double shape, double rate, double lo, double hi,
                       bool* clamped = nullptr) {
  if (clamped) *clamped = false;
  for (int t = 0; t < 64; ++t) {
    const double draw = 1.0 / rgamma(g, shape, 1.0 / rate);
    if (draw >= lo && draw <= hi) return draw;
  }
  const double flo = invgamma_cdf(shape, rate, lo);
  const double fhi = invgamma_cdf(shape, rate, hi);
  const double mass = fhi - flo;
  if (!(mass > 1e-12)) {
    if (clamped) *clamped = true;
    return flo >= 1.0 - fhi ? lo : hi;
  }
  const double u = flo + mass * runif(g);
  const double x = invgamma_quantile(shape, rate, u);
  return std::clamp(x, lo, hi);
}

inline double log_normal_pdf(double y, double mean, double var) {
  const double d = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

inline double logaddexp(double a, double b) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a == -inf) return b;
  if (b == -inf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace repmix
