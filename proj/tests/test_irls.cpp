#include <stdexcept>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "mixclust/augment.hpp"
#include "mixclust/distributions.hpp"
#include "mixclust/rng.hpp"
#include "oracles.hpp"

using mixclust::IrlsError;
using mixclust::IrlsResult;
using mixclust::irls_beta_fit;
using mixclust::Rng;

namespace {

struct Problem {
  std::vector<double> y;
  std::vector<double> X;  // row-major m x k
  std::size_t k;
};

// Draws a design with an intercept column and responses from the beta
// observation model at the given coefficients.
Problem make_problem(std::size_t m, const std::vector<double>& beta,
                     double phi, Rng& rng) {
  Problem pr;
  pr.k = beta.size();
  pr.X.resize(m * pr.k);
  pr.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    pr.X[i * pr.k] = 1.0;
    for (std::size_t j = 1; j < pr.k; ++j) {
      pr.X[i * pr.k + j] = rng.normal();
    }
    double eta = 0.0;
    for (std::size_t j = 0; j < pr.k; ++j) {
      eta += pr.X[i * pr.k + j] * beta[j];
    }
    const double mu = 1.0 / (1.0 + std::exp(-eta));
    pr.y[i] = mixclust::sample_beta(mu * phi, (1.0 - mu) * phi, rng);
  }
  return pr;
}

}  // namespace

TEST_CASE("constant response at one half has a zero coefficient fit") {
  const std::vector<double> y(12, 0.5);
  std::vector<double> X(12, 1.0);
  const IrlsResult r = irls_beta_fit(y, X, 1, 3.0);
  CHECK(r.converged);
  CHECK(r.beta[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.score_norm <= 1e-10);
}

TEST_CASE("converged fits zero the exact score") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Problem pr = make_problem(120, {0.3, -0.8, 0.5}, 7.0, rng);
    const IrlsResult r = irls_beta_fit(pr.y, pr.X, pr.k, 7.0);
    CHECK(r.converged);
    CHECK(r.score_norm <= 1e-6);
  }
}

TEST_CASE("fits match an independent likelihood maximizer") {
  Rng rng(32);
  for (int rep = 0; rep < 5; ++rep) {
    const double phi = 20.0;
    const Problem pr = make_problem(80, {0.4, -0.6}, phi, rng);
    const IrlsResult r = irls_beta_fit(pr.y, pr.X, pr.k, phi);
    const std::vector<double> ref =
        oracles::beta_ml_golden(pr.y, pr.X, pr.k, phi);
    for (std::size_t j = 0; j < pr.k; ++j) {
      CHECK(r.beta[j] == doctest::Approx(ref[j]).epsilon(1e-3));
    }
    // And the fit should not lose likelihood against the oracle point.
    CHECK(oracles::beta_loglik(pr.y, pr.X, pr.k, r.beta, phi) >=
          oracles::beta_loglik(pr.y, pr.X, pr.k, ref, phi) - 1e-6);
  }
}

TEST_CASE("replicated fits recover the generating coefficients") {
  const std::vector<double> truth = {0.25, -0.5};
  const double phi = 15.0;
  const int reps = 50;
  Rng rng(33);
  std::vector<double> est0, est1;
  for (int rep = 0; rep < reps; ++rep) {
    const Problem pr = make_problem(150, truth, phi, rng);
    const IrlsResult r = irls_beta_fit(pr.y, pr.X, pr.k, phi);
    est0.push_back(r.beta[0]);
    est1.push_back(r.beta[1]);
  }
  auto mean_sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair<double, double>(m, std::sqrt(ss / (v.size() - 1)));
  };
  const auto [m0, s0] = mean_sd(est0);
  const auto [m1, s1] = mean_sd(est1);
  CHECK(std::abs(m0 - truth[0]) <= 3.0 * s0 / std::sqrt(double(reps)));
  CHECK(std::abs(m1 - truth[1]) <= 3.0 * s1 / std::sqrt(double(reps)));
}

TEST_CASE("degenerate designs and inputs are rejected") {
  Rng rng(34);
  const Problem pr = make_problem(30, {0.2, 0.4}, 5.0, rng);

  // Duplicate the second column: rank 2 design presented as k = 3.
  std::vector<double> wide(30 * 3);
  for (std::size_t i = 0; i < 30; ++i) {
    wide[i * 3 + 0] = pr.X[i * 2 + 0];
    wide[i * 3 + 1] = pr.X[i * 2 + 1];
    wide[i * 3 + 2] = pr.X[i * 2 + 1];
  }
  CHECK_THROWS_AS(irls_beta_fit(pr.y, wide, 3, 5.0), std::invalid_argument);

  const std::vector<double> tiny_y = {0.2, 0.4};
  const std::vector<double> tiny_X = {1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(irls_beta_fit(tiny_y, tiny_X, 2, 5.0),
                  std::invalid_argument);

  std::vector<double> bad_y = pr.y;
  bad_y[3] = 1.0;
  CHECK_THROWS_AS(irls_beta_fit(bad_y, pr.X, pr.k, 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(irls_beta_fit(pr.y, pr.X, pr.k, 0.0),
                  std::invalid_argument);
  std::vector<double> short_X(pr.X.begin(), pr.X.end() - 2);
  CHECK_THROWS_AS(irls_beta_fit(pr.y, short_X, pr.k, 5.0),
                  std::invalid_argument);
}

TEST_CASE("non-convergence raises an error carrying the last iterate") {
  Rng rng(35);
  const Problem pr = make_problem(60, {0.5, -1.2}, 8.0, rng);
  try {
    irls_beta_fit(pr.y, pr.X, pr.k, 8.0, 1e-8, 1);
    FAIL("expected IrlsError");
  } catch (const IrlsError& e) {
    CHECK(e.iterations == 1);
    CHECK(e.last_beta.size() == pr.k);
    CHECK(std::isfinite(e.score_norm));
    CHECK(std::string(e.what()).find("no convergence") != std::string::npos);
  }
}
