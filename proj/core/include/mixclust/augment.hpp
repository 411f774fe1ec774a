#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mixclust/mixed_matrix.hpp"
#include "mixclust/rng.hpp"

namespace mixclust {

// A latent Gaussian working observation: z ~ N(linear predictor, var).
struct WorkingValue {
  double z = 0.0;
  double var = 1.0;
};

// Ordered thresholds for an ordinal column with L categories. gamma has
// L+1 entries with gamma[0] = -inf, gamma[1] = -1 and gamma[L] = +inf
// pinned for identifiability; interior entries are strictly increasing.
class Cutoffs {
 public:
  explicit Cutoffs(std::vector<double> gamma);

  // Default inference start: interior thresholds evenly spaced over (-1, 3],
  // i.e. gamma[1+m] = -1 + 4m/(L-1).
  static Cutoffs initial(int levels);

  int levels() const { return static_cast<int>(gamma_.size()) - 1; }
  const std::vector<double>& gamma() const { return gamma_; }
  double lower(int level) const { return gamma_[level - 1]; }
  double upper(int level) const { return gamma_[level]; }

 private:
  std::vector<double> gamma_;
};

// Probit draw for a binary entry: z ~ N(alpha+theta, 1) truncated to the
// side of zero selected by x.
WorkingValue augment_binary(int x, double alpha, double theta, Rng& rng);

// Probit draw for an ordinal entry at category `level` (1-based):
// z ~ N(alpha+theta, 1) truncated to (gamma[level-1], gamma[level]).
WorkingValue augment_ordinal(int level, double alpha, double theta,
                             const Cutoffs& cutoffs, Rng& rng);

// Gibbs update of the free interior thresholds given current working values
// z and observed categories x (1-based, parallel arrays). Each threshold is
// drawn uniformly from its admissible interval; a numerically empty interval
// leaves the previous value in place and bumps *skipped.
Cutoffs sample_cutoffs(const Cutoffs& current, std::span<const double> z,
                       std::span<const int> x, Rng& rng,
                       int* skipped = nullptr);

// Deterministic working observation for a count entry via a log-link
// linearization at eta = alpha + theta:
//   z = eta + (x - exp(eta)) / exp(eta),   var = exp(-eta).
WorkingValue working_count(double x, double alpha, double theta);

// Deterministic working observation for a proportion entry under the
// mean/dispersion beta parametrization with logit link:
//   mu   = logistic(eta)
//   z    = eta + (logit(y) - E[logit(y)]) / D
//   var  = 1 / (phi^2 (mu(1-mu))^2 (trigamma(mu phi) + trigamma((1-mu) phi)))
// where D = phi (trigamma(mu phi) + trigamma((1-mu) phi)) mu (1-mu) and
// E[logit(y)] = digamma(mu phi) - digamma((1-mu) phi).
// Throws std::domain_error when mu*phi or (1-mu)*phi falls below 1e-10.
WorkingValue working_beta(double y, double eta, double phi);

// Continuous entries are already Gaussian: z = x - alpha, var = tau^2.
WorkingValue augment_continuous(double x, double alpha, double tau);

// One column's worth of working values, dispatched on the column type.
// theta_col holds the latent effect for each row under the column's current
// cluster. cutoffs may be null for non-ordinal columns.
void augment_column(std::span<const double> col, const ColumnType& type,
                    double alpha, std::span<const double> theta_col,
                    const Cutoffs* cutoffs, double phi, double tau, Rng& rng,
                    std::span<WorkingValue> out);

struct IrlsResult {
  std::vector<double> beta;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;  // max-abs coordinate of the exact score at beta
};

// Thrown when the fixed-dispersion beta regression fails to converge;
// carries the last iterate for diagnostics.
struct IrlsError : std::runtime_error {
  IrlsError(const std::string& msg, std::vector<double> beta, int iterations,
            double score_norm)
      : std::runtime_error(msg),
        last_beta(std::move(beta)),
        iterations(iterations),
        score_norm(score_norm) {}
  std::vector<double> last_beta;
  int iterations;
  double score_norm;
};

// Maximum-likelihood coefficients of a fixed-dispersion beta regression
// with logit link, via iteratively reweighted least squares on the working
// observations above. X is row-major m x k and must have full column rank
// (checked with a rank-revealing QR); y entries must lie strictly in (0,1).
// Stops when the max-abs coefficient change drops below tol; throws
// IrlsError after maxit iterations without convergence.
IrlsResult irls_beta_fit(std::span<const double> y, std::span<const double> X,
                         std::size_t k, double phi, double tol = 1e-8,
                         int maxit = 100);

}  // namespace mixclust
