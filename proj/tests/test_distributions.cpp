#include <stdexcept>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mixclust/distributions.hpp"
#include "mixclust/rng.hpp"

using mixclust::Rng;
using mixclust::sample_beta;
using mixclust::sample_gamma;
using mixclust::sample_poisson;
using mixclust::sample_truncated_normal;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("rng substreams depend on key, not parent consumption") {
  Rng a(42), b(42);
  // Consume from one parent only.
  for (int i = 0; i < 57; ++i) (void)a.uniform();
  Rng ca = a.split(7), cb = b.split(7);
  for (int i = 0; i < 20; ++i) {
    CHECK(ca.next_u64() == cb.next_u64());
  }
  Rng other = b.split(8);
  CHECK(other.next_u64() != b.split(7).next_u64());
}

TEST_CASE("rng uniform stays strictly inside (0,1)") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("truncated normal draws respect their bounds") {
  Rng rng(3);
  const struct {
    double mean, sd, lo, hi;
  } cases[] = {
      {0, 1, 0, kInf},     {0, 1, -kInf, 0}, {2, 3, -1, 4},
      {0, 1, 5.5, kInf},   {0, 1, -kInf, -6.5}, {0, 1, 6, 7},
      {0, 1, 6, 6.0001},   {10, 0.1, 9.9, 10.05}, {0, 1, -0.3, -0.2999},
  };
  for (const auto& c : cases) {
    for (int i = 0; i < 4000; ++i) {
      const double x = sample_truncated_normal(c.mean, c.sd, c.lo, c.hi, rng);
      CHECK(x > c.lo);
      CHECK(x < c.hi);
    }
  }
}

TEST_CASE("truncated normal argument validation") {
  Rng rng(4);
  CHECK_THROWS_AS(sample_truncated_normal(0, 0.0, 0, 1, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_truncated_normal(0, 1, 2, 1, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_truncated_normal(0, 1, 1, 1, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_truncated_normal(0, 1, 1, 1 + 1e-15, rng),
                  std::invalid_argument);
}

TEST_CASE("truncated normal is deterministic given the seed") {
  Rng r1(99), r2(99);
  for (int i = 0; i < 200; ++i) {
    CHECK(sample_truncated_normal(1.0, 2.0, 0.0, kInf, r1) ==
          sample_truncated_normal(1.0, 2.0, 0.0, kInf, r2));
  }
}

TEST_CASE("half-normal mean matches sqrt(2/pi)") {
  Rng rng(7);
  double acc = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    acc += sample_truncated_normal(0.0, 1.0, 0.0, kInf, rng);
  }
  CHECK(std::fabs(acc / n - 0.7978845608028654) < 0.003);
}

TEST_CASE("doubly truncated moments match the analytic values") {
  Rng rng(8);
  // (lo,hi)=(-1,2): mean 0.22963717909132897, sd 0.7209455868590458
  double acc = 0.0, acc2 = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double x = sample_truncated_normal(0.0, 1.0, -1.0, 2.0, rng);
    acc += x;
    acc2 += x * x;
  }
  const double mean = acc / n;
  CHECK(std::fabs(mean - 0.22963717909132897) < 4.0 * 0.721 / std::sqrt(n));
  const double sd = std::sqrt(acc2 / n - mean * mean);
  CHECK(sd == doctest::Approx(0.7209455868590458).epsilon(0.01));
}

TEST_CASE("far-tail truncation stays unbiased") {
  Rng rng(9);
  // (lo,hi)=(6,7): mean 6.157210885706799, sd 0.1508260346535247
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    acc += sample_truncated_normal(0.0, 1.0, 6.0, 7.0, rng);
  }
  CHECK(std::fabs(acc / n - 6.157210885706799) <
        4.0 * 0.1509 / std::sqrt(n));
}

TEST_CASE("gamma sampler moments") {
  Rng rng(11);
  const int n = 400000;
  double a1 = 0.0;
  for (int i = 0; i < n; ++i) a1 += sample_gamma(1.0, 1.0, rng);
  CHECK(std::fabs(a1 / n - 1.0) < 4.0 / std::sqrt(n));

  double a2 = 0.0, a2sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gamma(2.5, 0.5, rng);
    a2 += x;
    a2sq += x * x;
  }
  const double mean = a2 / n;  // 5.0 expected, sd sqrt(10)
  CHECK(std::fabs(mean - 5.0) < 4.0 * std::sqrt(10.0 / n));
  CHECK(a2sq / n - mean * mean == doctest::Approx(10.0).epsilon(0.03));

  double a3 = 0.0;
  for (int i = 0; i < n; ++i) a3 += sample_gamma(0.3, 1.0, rng);
  CHECK(std::fabs(a3 / n - 0.3) < 4.0 * std::sqrt(0.3 / n));

  CHECK_THROWS_AS(sample_gamma(0.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_gamma(1.0, -1.0, rng), std::invalid_argument);
}

TEST_CASE("beta sampler moments and support") {
  Rng rng(12);
  const int n = 400000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_beta(2.0, 2.0, rng);
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    acc += x;
  }
  // Beta(2,2): mean 1/2, sd sqrt(1/20)
  CHECK(std::fabs(acc / n - 0.5) < 4.0 * std::sqrt(0.05 / n));

  double u = 0.0;
  for (int i = 0; i < n; ++i) u += sample_beta(0.5, 0.5, rng);
  CHECK(std::fabs(u / n - 0.5) < 4.0 * std::sqrt(0.125 / n));

  CHECK_THROWS_AS(sample_beta(0.0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("poisson sampler matches its first two moments") {
  Rng rng(13);
  const int n = 1000000;
  double acc = 0.0, acc2 = 0.0;
  long long le2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_poisson(3.0, rng));
    CHECK(x >= 0.0);
    acc += x;
    acc2 += x * x;
    if (x <= 2.0) ++le2;
  }
  const double mean = acc / n;
  CHECK(std::fabs(mean - 3.0) < 0.01);
  CHECK(std::fabs((acc2 / n - mean * mean) - 3.0) < 0.05);
  // P(X <= 2) = 0.42319008112684364
  CHECK(std::fabs(static_cast<double>(le2) / n - 0.42319008112684364) < 0.003);
}

TEST_CASE("poisson transformed-rejection branch is unbiased") {
  Rng rng(14);
  const int n = 300000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_poisson(100.0, rng));
    acc += x;
    acc2 += x * x;
  }
  const double mean = acc / n;
  CHECK(std::fabs(mean - 100.0) < 4.0 * 10.0 / std::sqrt(n));
  CHECK(acc2 / n - mean * mean == doctest::Approx(100.0).epsilon(0.02));
  CHECK_THROWS_AS(sample_poisson(0.0, rng), std::invalid_argument);
}
