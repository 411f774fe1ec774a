#pragma once

namespace mixclust {

// First derivative of log Gamma. Requires x > 0, throws std::domain_error
// otherwise. Absolute error below 1e-10 on [1e-4, 1e6].
double digamma(double x);

// Second derivative of log Gamma. Requires x > 0, throws std::domain_error
// otherwise. Relative error below 1e-9 on [1e-4, 1e6].
double trigamma(double x);

// Standard normal CDF, accurate to ~1e-15 absolute everywhere.
double std_normal_cdf(double x);

// Standard normal quantile. p must lie in [0,1]: the endpoints map to
// -inf / +inf, anything outside throws std::domain_error.
double std_normal_quantile(double p);

}  // namespace mixclust
