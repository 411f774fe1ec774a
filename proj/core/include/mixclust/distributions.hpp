#pragma once

#include <cstdint>

#include "mixclust/rng.hpp"

namespace mixclust {

// Normal(mean, sd^2) restricted to the open interval (lo, hi). The bounds
// may be +-infinity. The draw always lies strictly inside (lo, hi).
// Throws std::invalid_argument for sd <= 0, lo >= hi, or a degenerate
// finite interval (hi - lo < 1e-14).
double sample_truncated_normal(double mean, double sd, double lo, double hi,
                               Rng& rng);

// Gamma(shape, rate) via Marsaglia-Tsang squeeze (boosted for shape < 1).
double sample_gamma(double shape, double rate, Rng& rng);

// Beta(a, b) from a pair of Gamma draws; result strictly inside (0,1).
double sample_beta(double a, double b, Rng& rng);

// Poisson(lambda): Knuth product-of-uniforms below lambda = 30, Hormann's
// PTRS transformed rejection above. Throws for lambda <= 0.
long long sample_poisson(double lambda, Rng& rng);

}  // namespace mixclust
