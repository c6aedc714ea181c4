#pragma once

namespace dnaembed {

/// Natural log of the Gamma function for x > 0. Throws DomainError otherwise.
double ln_gamma(double x);

/// Inverse standard normal CDF on (0, 1). Throws DomainError otherwise.
double probit(double p);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace dnaembed
