#include "mixclust/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixclust/special.hpp"

namespace mixclust {

namespace {

constexpr double kTailCut = 5.0;

// Shifted-exponential rejection for a standardized truncation interval
// [a, b] lying in the upper tail (a >= kTailCut, b possibly infinite).
// The proposal Exp(alpha) shifted to a is conditioned to [a, b] by
// inversion, so arbitrarily narrow intervals stay efficient: the
// acceptance probability is bounded away from zero for all a >= 1.
double tail_two_sided(double a, double b, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double u = rng.uniform();
    double z;
    if (std::isinf(b)) {
      z = a - std::log(u) / alpha;
    } else {
      const double w = -std::expm1(-alpha * (b - a));
      z = a - std::log1p(-u * w) / alpha;
    }
    const double t = z - alpha;
    if (std::log(rng.uniform()) <= -0.5 * t * t) {
      return z;
    }
  }
}

}  // namespace

double sample_truncated_normal(double mean, double sd, double lo, double hi,
                               Rng& rng) {
  if (!(sd > 0.0)) {
    throw std::invalid_argument("sample_truncated_normal: sd must be > 0");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("sample_truncated_normal: empty interval");
  }
  if (hi - lo < 1e-14) {
    throw std::invalid_argument(
        "sample_truncated_normal: degenerate interval");
  }
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double z;
  if (a >= kTailCut) {
    z = tail_two_sided(a, b, rng);
  } else if (b <= -kTailCut) {
    z = -tail_two_sided(-b, -a, rng);
  } else {
    // Moderate truncation: inverse CDF between the interval's CDF values.
    const double pa = std::isinf(a) ? 0.0 : std_normal_cdf(a);
    const double pb = std::isinf(b) ? 1.0 : std_normal_cdf(b);
    if (pb - pa < 1e-300) {
      // CDF values collide in double precision (only possible for a narrow
      // finite interval); the midpoint is the honest limit draw.
      z = 0.5 * (a + b);
    } else {
      z = std_normal_quantile(pa + (pb - pa) * rng.uniform());
    }
  }
  double x = mean + sd * z;
  if (!(x > lo)) x = std::nextafter(lo, hi);
  if (!(x < hi)) x = std::nextafter(hi, lo);
  return x;
}

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("sample_gamma: parameters must be > 0");
  }
  if (shape < 1.0) {
    // Boost: draw at shape+1 and scale by U^(1/shape).
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("sample_beta: parameters must be > 0");
  }
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  double r = x / (x + y);
  if (!(r > 0.0)) r = std::nextafter(0.0, 1.0);
  if (!(r < 1.0)) r = std::nextafter(1.0, 0.0);
  return r;
}

long long sample_poisson(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("sample_poisson: lambda must be > 0");
  }
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    double prod = rng.uniform();
    long long k = 0;
    while (prod > limit) {
      prod *= rng.uniform();
      ++k;
    }
    return k;
  }
  // Hormann (1993) PTRS transformed rejection.
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_lambda - lambda - std::lgamma(k + 1.0)) {
      return static_cast<long long>(k);
    }
  }
}

}  // namespace mixclust
