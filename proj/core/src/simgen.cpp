#include "mixclust/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixclust/distributions.hpp"
#include "mixclust/partition.hpp"
#include "mixclust/special.hpp"

namespace mixclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

SimConfig::SimConfig() : gamma{-kInf, -2.0, -1.0, 0.0, 1.0, kInf} {}

void validate(const TypeMix& mix) {
  const double parts[5] = {mix.binary, mix.ordinal, mix.count, mix.proportion,
                           mix.continuous};
  double total = 0.0;
  for (double w : parts) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("TypeMix: weights must be >= 0");
    }
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("TypeMix: weights must sum to 1");
  }
}

void validate(const SimConfig& cfg) {
  if (cfg.n < 2 || cfg.p < 2) {
    throw std::invalid_argument("SimConfig: need n >= 2 and p >= 2");
  }
  if (!(cfg.m1 > 0.0) || !(cfg.d >= 0.0 && cfg.d < 1.0)) {
    throw std::invalid_argument("SimConfig: bad partition prior parameters");
  }
  if (!(cfg.m2 > 0.0) || !(cfg.tau2_sq > 0.0)) {
    throw std::invalid_argument("SimConfig: bad latent-effect parameters");
  }
  if (!(cfg.tau > 0.0) || !(cfg.phi > 0.0)) {
    throw std::invalid_argument("SimConfig: tau and phi must be > 0");
  }
  if (cfg.gamma.size() < 3 || cfg.gamma.front() != -kInf ||
      cfg.gamma.back() != kInf) {
    throw std::invalid_argument("SimConfig: gamma must run from -inf to +inf");
  }
  for (std::size_t l = 1; l < cfg.gamma.size(); ++l) {
    if (!(cfg.gamma[l] > cfg.gamma[l - 1])) {
      throw std::invalid_argument("SimConfig: gamma must increase");
    }
  }
  validate(cfg.mix);
}

std::vector<int> generate_partition(int p, double m1, double d, Rng& rng) {
  validate(PdpParams{m1, d});
  if (p < 1) throw std::invalid_argument("generate_partition: p must be >= 1");
  std::vector<int> labels(p);
  std::vector<int> sizes;
  for (int j = 0; j < p; ++j) {
    const std::vector<double> w = pdp_predictive_weights(sizes, d, m1);
    double r = rng.uniform();
    int pick = static_cast<int>(w.size()) - 1;
    for (std::size_t k = 0; k < w.size(); ++k) {
      r -= w[k];
      if (r <= 0.0) {
        pick = static_cast<int>(k);
        break;
      }
    }
    labels[j] = pick;
    if (pick == static_cast<int>(sizes.size())) {
      sizes.push_back(1);
    } else {
      ++sizes[pick];
    }
  }
  return labels;
}

ColMatrix generate_theta(int n, int q0, double m2, double mu2, double tau2_sq,
                         Rng& rng) {
  if (n < 1 || q0 < 1) {
    throw std::invalid_argument("generate_theta: need n >= 1 and q0 >= 1");
  }
  if (!(m2 > 0.0) || !(tau2_sq > 0.0)) {
    throw std::invalid_argument("generate_theta: bad urn parameters");
  }
  ColMatrix theta(n, q0);
  std::vector<double> values;
  std::vector<int> counts;
  const double sd = std::sqrt(tau2_sq);
  const int cells = n * q0;
  for (int t = 0; t < cells; ++t) {
    double r = rng.uniform() * (t + m2);
    int pick = -1;
    for (std::size_t a = 0; a < values.size(); ++a) {
      r -= counts[a];
      if (r <= 0.0) {
        pick = static_cast<int>(a);
        break;
      }
    }
    if (pick < 0) {
      values.push_back(mu2 + sd * rng.normal());
      counts.push_back(0);
      pick = static_cast<int>(values.size()) - 1;
    }
    ++counts[pick];
    theta.data[t] = values[pick];
  }
  return theta;
}

std::pair<MixedMatrix, GroundTruth> generate_data(const SimConfig& cfg,
                                                  Rng& rng) {
  validate(cfg);
  const std::vector<int> labels0 =
      generate_partition(cfg.p, cfg.m1, cfg.d, rng);
  int q0 = 0;
  for (int c : labels0) q0 = std::max(q0, c + 1);
  const ColMatrix theta =
      generate_theta(cfg.n, q0, cfg.m2, cfg.mu2, cfg.tau2_sq, rng);

  const int levels = static_cast<int>(cfg.gamma.size()) - 1;
  const double cum[5] = {
      cfg.mix.binary, cfg.mix.binary + cfg.mix.ordinal,
      cfg.mix.binary + cfg.mix.ordinal + cfg.mix.count,
      cfg.mix.binary + cfg.mix.ordinal + cfg.mix.count + cfg.mix.proportion,
      1.0};

  std::vector<std::string> names(cfg.p);
  std::vector<ColumnType> types(cfg.p);
  std::vector<std::vector<double>> cols(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    names[j] = "v" + std::to_string(j + 1);
    const double u = rng.uniform();
    int kind = 0;
    while (kind < 4 && u > cum[kind]) ++kind;
    const double* th = theta.col(labels0[j]);
    std::vector<double>& col = cols[j];
    col.resize(cfg.n);
    switch (kind) {
      case 0:
        types[j] = {ColumnKind::Binary, 0};
        for (int i = 0; i < cfg.n; ++i) {
          col[i] = rng.uniform() < std_normal_cdf(th[i]) ? 1.0 : 0.0;
        }
        break;
      case 1:
        types[j] = {ColumnKind::Ordinal, levels};
        for (int i = 0; i < cfg.n; ++i) {
          const double z = th[i] + rng.normal();
          int l = 1;
          while (l < levels && z > cfg.gamma[l]) ++l;
          col[i] = l;
        }
        break;
      case 2:
        types[j] = {ColumnKind::Count, 0};
        for (int i = 0; i < cfg.n; ++i) {
          col[i] = static_cast<double>(sample_poisson(std::exp(th[i]), rng));
        }
        break;
      case 3:
        types[j] = {ColumnKind::Proportion, 0};
        for (int i = 0; i < cfg.n; ++i) {
          const double mu = 1.0 / (1.0 + std::exp(-th[i]));
          col[i] = sample_beta(mu * cfg.phi, (1.0 - mu) * cfg.phi, rng);
        }
        break;
      default:
        types[j] = {ColumnKind::Continuous, 0};
        for (int i = 0; i < cfg.n; ++i) {
          col[i] = cfg.alpha_cont + th[i] + cfg.tau * rng.normal();
        }
        break;
    }
  }

  GroundTruth truth;
  truth.labels.resize(cfg.p);
  for (int j = 0; j < cfg.p; ++j) truth.labels[j] = labels0[j] + 1;
  truth.q0 = q0;
  truth.theta = theta;
  truth.types = types;

  MixedMatrix m = MixedMatrix::from_columns(std::move(names), std::move(types),
                                            std::move(cols));
  return {std::move(m), std::move(truth)};
}

SimConfig scenario(const std::string& name) {
  SimConfig cfg;
  if (name == "binary") {
    cfg.mix = {1.0, 0.0, 0.0, 0.0, 0.0};
  } else if (name == "ordinal") {
    cfg.mix = {0.0, 1.0, 0.0, 0.0, 0.0};
  } else if (name == "count") {
    cfg.mix = {0.0, 0.0, 1.0, 0.0, 0.0};
  } else if (name == "proportion") {
    cfg.mix = {0.0, 0.0, 0.0, 1.0, 0.0};
  } else if (name == "continuous") {
    cfg.mix = {0.0, 0.0, 0.0, 0.0, 1.0};
  } else if (name == "uniform-mix") {
    cfg.mix = {0.2, 0.2, 0.2, 0.2, 0.2};
  } else if (name == "benchmark-mix") {
    cfg.mix = {0.19, 0.06, 0.00, 0.27, 0.48};
  } else {
    throw std::invalid_argument("scenario: unknown name '" + name + "'");
  }
  return cfg;
}

}  // namespace mixclust
