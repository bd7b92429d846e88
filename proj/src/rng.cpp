#include "repmix/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

namespace repmix {

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

double invgamma_cdf(double shape, double rate, double x) {
  if (x <= 0.0) return 0.0;
  // X ~ IG(a, b)  <=>  b/X ~ Gamma(a, 1), so P(X <= x) = Q(a, b/x).
  return boost::math::gamma_q(shape, rate / x);
}

double invgamma_quantile(double shape, double rate, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return rate / boost::math::gamma_q_inv(shape, p);
}

}  // namespace repmix
