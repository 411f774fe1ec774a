#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixclust/matrix.hpp"
#include "mixclust/mixed_matrix.hpp"
#include "mixclust/rng.hpp"

namespace mixclust {

// Column-type proportions; must be non-negative and sum to 1.
struct TypeMix {
  double binary = 0.0;
  double ordinal = 0.0;
  double count = 0.0;
  double proportion = 0.0;
  double continuous = 0.0;
};

void validate(const TypeMix& mix);

struct SimConfig {
  int n = 71;
  int p = 352;
  std::uint64_t seed = 0;

  double m1 = 20.0;    // partition prior mass
  double d = 0.3;      // partition prior discount
  double m2 = 11.0;    // latent-effect prior mass
  double mu2 = -0.18;  // latent-effect base mean
  double tau2_sq = 2.2;

  double alpha_cont = 6.27;  // continuous location
  double tau = 2.14;         // continuous noise scale
  double phi = 19.43;        // beta dispersion

  // Thresholds used to cut the latent normal into ordinal categories
  // (L+1 entries, outer entries infinite).
  std::vector<double> gamma;

  TypeMix mix;

  SimConfig();
};

void validate(const SimConfig& cfg);

struct GroundTruth {
  std::vector<int> labels;     // 1-based column cluster labels
  int q0 = 0;
  ColMatrix theta;             // n x q0 latent effects
  std::vector<ColumnType> types;
};

// Sequential draw from the two-parameter Poisson-Dirichlet allocation
// prior; returns 0-based contiguous labels.
std::vector<int> generate_partition(int p, double m1, double d, Rng& rng);

// n x q0 latent-effect table drawn from the Dirichlet-process Polya urn
// with base N(mu2, tau2_sq), one sequential pass over all cells.
ColMatrix generate_theta(int n, int q0, double m2, double mu2, double tau2_sq,
                         Rng& rng);

// Observation layer on top of a latent table, one column type drawn per
// column from the mix:
//   binary      Bernoulli(Phi(theta))
//   ordinal     categories cut from N(theta, 1) by the gamma grid
//   count       Poisson(exp(theta))
//   proportion  Beta(mu phi, (1-mu) phi), mu = logistic(theta)
//   continuous  N(alpha_cont + theta, tau^2)
// Proportion entries are clamped like any ingested data.
std::pair<MixedMatrix, GroundTruth> generate_data(const SimConfig& cfg,
                                                  Rng& rng);

// Named scenario presets for the configured type mix: "binary", "ordinal",
// "count", "proportion", "continuous" (pure columns), "uniform-mix" (0.2
// each) and "benchmark-mix" (binary 0.19, ordinal 0.06, count 0.00,
// proportion 0.27, continuous 0.48). Throws on unknown names.
SimConfig scenario(const std::string& name);

}  // namespace mixclust
