#include "mixclust/augment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixclust/distributions.hpp"
#include "mixclust/special.hpp"

namespace mixclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp() stays in range for any linear predictor the sampler can produce.
double clamp_eta(double eta) { return std::clamp(eta, -300.0, 300.0); }

}  // namespace

Cutoffs::Cutoffs(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.size() < 3) {
    throw std::invalid_argument("Cutoffs: need at least 2 categories");
  }
  if (!(gamma_.front() == -kInf)) {
    throw std::invalid_argument("Cutoffs: gamma[0] must be -inf");
  }
  if (!(gamma_[1] == -1.0)) {
    throw std::invalid_argument("Cutoffs: gamma[1] is pinned at -1");
  }
  if (!(gamma_.back() == kInf)) {
    throw std::invalid_argument("Cutoffs: gamma[L] must be +inf");
  }
  for (std::size_t l = 1; l + 1 < gamma_.size(); ++l) {
    if (!(gamma_[l] > gamma_[l - 1])) {
      throw std::invalid_argument("Cutoffs: thresholds must increase");
    }
    if (!std::isfinite(gamma_[l])) {
      throw std::invalid_argument("Cutoffs: interior thresholds are finite");
    }
  }
}

Cutoffs Cutoffs::initial(int levels) {
  if (levels < 2) {
    throw std::invalid_argument("Cutoffs: need at least 2 categories");
  }
  std::vector<double> g(levels + 1);
  g[0] = -kInf;
  g[1] = -1.0;
  for (int m = 1; m <= levels - 2; ++m) {
    g[1 + m] = -1.0 + 4.0 * m / (levels - 1);
  }
  g[levels] = kInf;
  return Cutoffs(std::move(g));
}

WorkingValue augment_binary(int x, double alpha, double theta, Rng& rng) {
  if (x != 0 && x != 1) {
    throw std::invalid_argument("augment_binary: x must be 0 or 1");
  }
  const double mean = alpha + theta;
  const double z = (x == 1) ? sample_truncated_normal(mean, 1.0, 0.0, kInf, rng)
                            : sample_truncated_normal(mean, 1.0, -kInf, 0.0, rng);
  return {z, 1.0};
}

WorkingValue augment_ordinal(int level, double alpha, double theta,
                             const Cutoffs& cutoffs, Rng& rng) {
  if (level < 1 || level > cutoffs.levels()) {
    throw std::invalid_argument("augment_ordinal: level out of range");
  }
  const double mean = alpha + theta;
  const double z = sample_truncated_normal(mean, 1.0, cutoffs.lower(level),
                                           cutoffs.upper(level), rng);
  return {z, 1.0};
}

Cutoffs sample_cutoffs(const Cutoffs& current, std::span<const double> z,
                       std::span<const int> x, Rng& rng, int* skipped) {
  if (z.size() != x.size()) {
    throw std::invalid_argument("sample_cutoffs: z and x length mismatch");
  }
  const int L = current.levels();
  std::vector<double> g = current.gamma();
  // Extremes of the working values at each observed category.
  std::vector<double> zmax(L + 1, -kInf), zmin(L + 1, kInf);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int l = x[i];
    if (l < 1 || l > L) {
      throw std::invalid_argument("sample_cutoffs: category out of range");
    }
    zmax[l] = std::max(zmax[l], z[i]);
    zmin[l] = std::min(zmin[l], z[i]);
  }
  int skips = 0;
  // gamma[1] and the two outer sentinels are pinned; the rest are drawn
  // uniformly between the neighbouring constraints, lowest index first.
  for (int l = 2; l <= L - 1; ++l) {
    const double lo = std::max(zmax[l], g[l - 1]);
    const double hi = std::min(zmin[l + 1], g[l + 1]);
    if (hi > lo && std::isfinite(lo) && std::isfinite(hi)) {
      g[l] = lo + (hi - lo) * rng.uniform();
    } else {
      ++skips;
    }
  }
  if (skipped) *skipped += skips;
  return Cutoffs(std::move(g));
}

WorkingValue working_count(double x, double alpha, double theta) {
  if (!(x >= 0.0)) {
    throw std::invalid_argument("working_count: x must be >= 0");
  }
  const double eta = clamp_eta(alpha + theta);
  const double mu = std::exp(eta);
  return {eta + (x - mu) / mu, std::exp(-eta)};
}

WorkingValue working_beta(double y, double eta, double phi) {
  if (!(phi > 0.0)) {
    throw std::invalid_argument("working_beta: phi must be > 0");
  }
  if (!(y > 0.0 && y < 1.0)) {
    throw std::invalid_argument("working_beta: y must lie in (0,1)");
  }
  const double e = clamp_eta(eta);
  const double mu = 1.0 / (1.0 + std::exp(-e));
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  if (a < 1e-10 || b < 1e-10) {
    throw std::domain_error("working_beta: beta parameters underflow");
  }
  const double ystar = std::log(y / (1.0 - y));
  const double mustar = digamma(a) - digamma(b);
  const double tri = trigamma(a) + trigamma(b);
  const double v = mu * (1.0 - mu);
  const double slope = phi * tri * v;  // d(mustar)/d(eta) at eta
  return {eta + (ystar - mustar) / slope, 1.0 / (phi * phi * v * v * tri)};
}

WorkingValue augment_continuous(double x, double alpha, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("augment_continuous: tau must be > 0");
  }
  return {x - alpha, tau * tau};
}

void augment_column(std::span<const double> col, const ColumnType& type,
                    double alpha, std::span<const double> theta_col,
                    const Cutoffs* cutoffs, double phi, double tau, Rng& rng,
                    std::span<WorkingValue> out) {
  const std::size_t n = col.size();
  if (theta_col.size() != n || out.size() != n) {
    throw std::invalid_argument("augment_column: length mismatch");
  }
  switch (type.kind) {
    case ColumnKind::Binary:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = augment_binary(static_cast<int>(col[i]), alpha, theta_col[i],
                                rng);
      }
      break;
    case ColumnKind::Ordinal:
      if (!cutoffs) {
        throw std::logic_error("augment_column: ordinal column needs cutoffs");
      }
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = augment_ordinal(static_cast<int>(col[i]), alpha,
                                 theta_col[i], *cutoffs, rng);
      }
      break;
    case ColumnKind::Count:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = working_count(col[i], alpha, theta_col[i]);
      }
      break;
    case ColumnKind::Proportion:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = working_beta(col[i], alpha + theta_col[i], phi);
      }
      break;
    case ColumnKind::Continuous:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = augment_continuous(col[i], alpha, tau);
      }
      break;
  }
}

IrlsResult irls_beta_fit(std::span<const double> y, std::span<const double> X,
                         std::size_t k, double phi, double tol, int maxit) {
  const std::size_t m = y.size();
  if (k == 0 || m <= k) {
    throw std::invalid_argument("irls_beta_fit: need more rows than columns");
  }
  if (X.size() != m * k) {
    throw std::invalid_argument("irls_beta_fit: design size mismatch");
  }
  if (!(phi > 0.0)) {
    throw std::invalid_argument("irls_beta_fit: phi must be > 0");
  }
  for (double yi : y) {
    if (!(yi > 0.0 && yi < 1.0)) {
      throw std::invalid_argument("irls_beta_fit: responses must be in (0,1)");
    }
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      design(X.data(), static_cast<Eigen::Index>(m),
             static_cast<Eigen::Index>(k));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));

  auto exact_score_norm = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    Eigen::VectorXd score = Eigen::VectorXd::Zero(b.size());
    for (std::size_t i = 0; i < m; ++i) {
      const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
      const double mustar =
          digamma(mu * phi) - digamma((1.0 - mu) * phi);
      const double resid = std::log(y[i] / (1.0 - y[i])) - mustar;
      score += phi * mu * (1.0 - mu) * resid * design.row(i).transpose();
    }
    return score.cwiseAbs().maxCoeff();
  };

  bool converged = false;
  int it = 0;
  while (it < maxit) {
    ++it;
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd zw(m), sw(m);
    for (std::size_t i = 0; i < m; ++i) {
      const WorkingValue wv = working_beta(y[i], eta[i], phi);
      sw[i] = 1.0 / std::sqrt(wv.var);
      zw[i] = wv.z * sw[i];
    }
    const Eigen::MatrixXd A = sw.asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
      throw std::invalid_argument("irls_beta_fit: design is rank deficient");
    }
    const Eigen::VectorXd next = qr.solve(zw);
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (delta < tol) {
      converged = true;
      break;
    }
  }

  IrlsResult result;
  result.beta.assign(beta.data(), beta.data() + beta.size());
  result.iterations = it;
  result.converged = converged;
  result.score_norm = exact_score_norm(beta);
  if (!converged) {
    std::ostringstream msg;
    msg << "irls_beta_fit: no convergence after " << maxit
        << " iterations (last max score " << result.score_norm << ")";
    throw IrlsError(msg.str(), result.beta, it, result.score_norm);
  }
  return result;
}

}  // namespace mixclust
