#include "dnaembed/special.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <string>

#include "dnaembed/errors.hpp"

namespace dnaembed {

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("ln_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("probit: argument must lie in (0, 1), got " + std::to_string(p));
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace dnaembed
