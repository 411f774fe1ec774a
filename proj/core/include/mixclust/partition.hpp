#pragma once

#include <span>
#include <vector>

#include "mixclust/matrix.hpp"
#include "mixclust/rng.hpp"

namespace mixclust {

// Two-parameter Poisson-Dirichlet prior on column partitions. discount = 0
// recovers the Dirichlet process with total mass `mass`.
struct PdpParams {
  double mass = 20.0;
  double discount = 0.3;
};

void validate(const PdpParams& pdp);

// Predictive allocation probabilities given current cluster sizes: entry k
// is proportional to (sizes[k] - discount), the trailing entry (a new
// cluster) to (mass + q * discount). Normalized to sum to one.
std::vector<double> pdp_predictive_weights(const std::vector<int>& sizes,
                                           double discount, double mass);

// Log prior probability of a partition with the given cluster sizes,
//   sum_{k=1}^{q-1} log(mass + k*discount)
// + sum_k sum_{t=1}^{n_k - 1} log(t - discount)
// - sum_{t=1}^{p-1} log(mass + t).
double pdp_log_eppf(const std::vector<int>& sizes, double discount,
                    double mass);

// Column partition: labels[j] in 0..q-1, labels contiguous, sizes[k] > 0.
class AllocationState {
 public:
  AllocationState() = default;
  static AllocationState singletons(int p);
  static AllocationState from_labels(std::vector<int> labels);

  int p() const { return static_cast<int>(labels_.size()); }
  int q() const { return static_cast<int>(sizes_.size()); }
  int label(int j) const { return labels_[j]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& sizes() const { return sizes_; }

  // Detaches column j (label becomes -1). If its cluster empties, the
  // cluster is deleted, higher labels shift down, and the old cluster index
  // is returned; otherwise returns -1.
  int remove_column(int j);

  // Attaches the detached column j to cluster k; k == q() opens a new one.
  void assign_column(int j, int k);

  // Throws std::logic_error if labels/sizes are inconsistent.
  void check_invariants() const;

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
};

// Latent effects: one value per (row, column-cluster) cell, drawn from a
// Dirichlet-process mixture with Gaussian base N(base_mean, base_var).
// Cells holding the same atom share a value exactly.
struct AtomState {
  int n = 0;
  double mass = 11.0;
  double base_mean = -0.18;
  double base_var = 2.2;

  ColMatrix theta;               // n x q latent effects
  std::vector<int> atom_of;      // n*q cell -> atom index (column-major)
  std::vector<double> atom_value;
  std::vector<int> atom_count;

  AtomState() = default;
  AtomState(int n_rows, double mass_, double mean_, double var_)
      : n(n_rows), mass(mass_), base_mean(mean_), base_var(var_) {
    theta.rows = n_rows;
  }

  int q() const { return theta.cols; }
  int total_cells() const { return n * theta.cols; }
  int cell_index(int i, int k) const { return k * n + i; }

  // One joint draw of a length-n column from the Polya urn implied by the
  // current atoms (sequentially self-reinforcing within the column, the
  // shared state is left untouched).
  struct UrnColumn {
    std::vector<double> values;    // n latent effects
    std::vector<int> atom_ref;     // >=0: existing atom; -1-t: fresh atom t
    std::vector<double> fresh;     // values of fresh atoms created en route
  };
  UrnColumn draw_urn_column(Rng& rng) const;

  // Appends an urn draw as the new rightmost cluster column.
  void append_column(const UrnColumn& column);

  // Removes cluster column k (its cells leave their atoms; empty atoms are
  // deleted and atom indices compacted).
  void erase_column(int k);

  // Shifts every atom value so the cell-weighted mean of theta is zero.
  void recenter();

  void check_invariants() const;
};

// One Gibbs update of the partition label of column j. R and V hold the
// centered working values and their variances (n x p). Existing clusters
// are scored against their current latent columns; the new-cluster weight
// integrates the candidate column out against the normal base measure cell
// by cell, and a chosen new cluster gets per-cell conjugate posterior draws.
// When prior_only is set, likelihood terms are dropped and a new cluster's
// column is drawn from the urn instead. m_aux is validated for
// compatibility but no candidate columns are drawn from it.
void sample_allocation_column(int j, const ColMatrix& R, const ColMatrix& V,
                              AllocationState& alloc, AtomState& atoms,
                              const PdpParams& pdp, int m_aux, bool prior_only,
                              Rng& rng);

// One sweep of latent-effect updates: each cell's atom membership is
// resampled (existing atoms compete with a fresh draw via the conjugate
// marginal), each atom is then redrawn from its pooled conjugate posterior,
// and the table is recentered.
void sample_theta(const AllocationState& alloc, AtomState& atoms,
                  const ColMatrix& R, const ColMatrix& V, bool prior_only,
                  Rng& rng);

// Independence Metropolis-Hastings update of the discount with the prior
// (point mass at zero w.p. 1/2, else uniform) as proposal. Returns the new
// discount.
double sample_discount(const AllocationState& alloc, const PdpParams& pdp,
                       Rng& rng, bool* accepted = nullptr);

// Random-walk Metropolis-Hastings update of the beta dispersion phi on the
// log scale (Gaussian step `step`), against the exact beta likelihood of
// the observed proportions x with linear predictors eta, and an
// Exponential(1) prior. Empty spans leave only the prior.
double sample_dispersion(double phi, std::span<const double> x,
                         std::span<const double> eta, double step, Rng& rng,
                         bool* accepted = nullptr);

// Conjugate update of the continuous noise scale tau: the precision
// 1/tau^2 gets a Gamma(2 + N/2, 1 + sum(residual^2)/2) draw.
double sample_tau(std::span<const double> residuals, Rng& rng);

}  // namespace mixclust
