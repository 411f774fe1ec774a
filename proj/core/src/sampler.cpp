#include "mixclust/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mixclust/jsonio.hpp"
#include "mixclust/special.hpp"
#include "mixclust/version.hpp"

namespace mixclust {

namespace {

constexpr std::uint64_t kInitStream = 0x696e697400000000ULL;
constexpr std::uint64_t kStateStream = 0x7374617465000000ULL;
constexpr std::uint64_t kAugBase = 0x6175670000000000ULL;

// Cell groups per column in the initial latent coarsening.
constexpr int kInitBins = 8;

// Per-cell value on the latent (link) scale; the per-column mean of this
// transform is exactly the column intercept.
double latent_cell(double x, const ColumnType& t, double eps0 = 0.01) {
  switch (t.kind) {
    case ColumnKind::Binary:
      return std_normal_quantile((x + eps0) / (1.0 + 2.0 * eps0));
    case ColumnKind::Ordinal:
      return std_normal_quantile((x + eps0) / (t.levels + 2.0 * eps0));
    case ColumnKind::Count:
      return std::log(x + eps0);
    case ColumnKind::Continuous:
      return x;
    case ColumnKind::Proportion:
      return std::log(x / (1.0 - x));
  }
  throw std::logic_error("latent_cell: unknown column kind");
}

// Nearest-neighbour columns within one data type, by mean squared distance
// between centered latent profiles. The lower-quartile distances mark
// near-replicate pairs: two columns sharing a cluster differ by observation
// noise alone, so those pairs identify the noise scale without any labels.
std::vector<std::pair<int, int>> replicate_pairs(const ColMatrix& w,
                                                 const std::vector<int>& cols) {
  const int c = static_cast<int>(cols.size());
  if (c < 2) return {};
  const int n = w.rows;
  std::vector<double> best(c, std::numeric_limits<double>::infinity());
  std::vector<int> mate(c, -1);
  for (int a = 0; a < c; ++a) {
    const double* wa = w.col(cols[a]);
    for (int b = 0; b < c; ++b) {
      if (a == b) continue;
      const double* wb = w.col(cols[b]);
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double diff = wa[i] - wb[i];
        ss += diff * diff;
      }
      ss /= n;
      if (ss < best[a]) {
        best[a] = ss;
        mate[a] = b;
      }
    }
  }
  std::vector<double> sorted = best;
  std::sort(sorted.begin(), sorted.end());
  const double cut = sorted[c / 4];
  std::set<std::pair<int, int>> dedup;
  for (int a = 0; a < c; ++a) {
    if (best[a] <= cut) {
      dedup.insert(std::minmax(cols[a], cols[mate[a]]));
    }
  }
  return {dedup.begin(), dedup.end()};
}

// Starting beta dispersion: the per-cell differences of a replicate pair are
// centered with variance 2 * (trigamma(mu phi) + trigamma((1-mu) phi)), so
// phi maximizes the exact scale likelihood of those differences. Falls back
// when no replicate pair exists.
double init_dispersion(const ColMatrix& w, const std::vector<double>& alpha,
                       const std::vector<int>& cols, double fallback) {
  const std::vector<std::pair<int, int>> pairs = replicate_pairs(w, cols);
  if (pairs.empty()) return fallback;
  const int n = w.rows;
  const auto loglik = [&](double phi) {
    double lp = 0.0;
    for (const auto& [j, k] : pairs) {
      const double* wj = w.col(j);
      const double* wk = w.col(k);
      for (int i = 0; i < n; ++i) {
        const double mid = 0.5 * (wj[i] + alpha[j] + wk[i] + alpha[k]);
        double mu = 1.0 / (1.0 + std::exp(-mid));
        mu = std::min(1.0 - 1e-9, std::max(1e-9, mu));
        const double s2 = trigamma(mu * phi) + trigamma((1.0 - mu) * phi);
        const double diff = wj[i] - wk[i];
        lp += -0.5 * std::log(s2) - diff * diff / (4.0 * s2);
      }
    }
    return lp;
  };
  double lo = std::log(0.2), hi = std::log(500.0);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = loglik(std::exp(c1)), f2 = loglik(std::exp(c2));
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = loglik(std::exp(c1));
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = loglik(std::exp(c2));
    }
  }
  return std::exp(0.5 * (lo + hi));
}

// Starting continuous noise scale from replicate-pair differences
// (difference variance = 2 tau^2).
double init_noise_scale(const ColMatrix& w, const std::vector<int>& cols,
                        double fallback) {
  const std::vector<std::pair<int, int>> pairs = replicate_pairs(w, cols);
  if (pairs.empty()) return fallback;
  double ss = 0.0;
  std::size_t cnt = 0;
  for (const auto& [j, k] : pairs) {
    const double* wj = w.col(j);
    const double* wk = w.col(k);
    for (int i = 0; i < w.rows; ++i) {
      const double diff = wj[i] - wk[i];
      ss += diff * diff;
      ++cnt;
    }
  }
  const double tau = std::sqrt(ss / (2.0 * cnt));
  return tau > 0.0 ? tau : fallback;
}

std::uint64_t aug_key(int iter, int j) {
  return kAugBase ^ (static_cast<std::uint64_t>(iter) << 24) ^
         static_cast<std::uint64_t>(j);
}

nlohmann::json config_to_json(const FitConfig& c) {
  return nlohmann::json{{"iterations", c.iterations},
                        {"burnin", c.burnin},
                        {"thin", c.thin},
                        {"seed", c.seed},
                        {"m1", c.m1},
                        {"d_init", c.d_init},
                        {"m2", c.m2},
                        {"mu2", c.mu2},
                        {"tau2_sq", c.tau2_sq},
                        {"phi_init", c.phi_init},
                        {"phi_step", c.phi_step},
                        {"m_aux", c.m_aux},
                        {"fix_d_zero", c.fix_d_zero},
                        {"update_d", c.update_d},
                        {"prior_only", c.prior_only}};
}

FitConfig config_from_json(const nlohmann::json& j) {
  FitConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.burnin = j.at("burnin").get<int>();
  c.thin = j.at("thin").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.m1 = j.at("m1").get<double>();
  c.d_init = j.at("d_init").get<double>();
  c.m2 = j.at("m2").get<double>();
  c.mu2 = j.at("mu2").get<double>();
  c.tau2_sq = j.at("tau2_sq").get<double>();
  c.phi_init = j.at("phi_init").get<double>();
  c.phi_step = j.at("phi_step").get<double>();
  c.m_aux = j.at("m_aux").get<int>();
  c.fix_d_zero = j.at("fix_d_zero").get<bool>();
  c.update_d = j.at("update_d").get<bool>();
  c.prior_only = j.at("prior_only").get<bool>();
  return c;
}

}  // namespace

void validate(const FitConfig& cfg) {
  if (cfg.iterations < 1) {
    throw std::invalid_argument("FitConfig: iterations must be >= 1");
  }
  if (cfg.burnin < 0 || cfg.burnin >= cfg.iterations) {
    throw std::invalid_argument("FitConfig: need 0 <= burnin < iterations");
  }
  if (cfg.thin < 1) throw std::invalid_argument("FitConfig: thin must be >= 1");
  if (!(cfg.m1 > 0.0)) throw std::invalid_argument("FitConfig: m1 must be > 0");
  if (!(cfg.d_init >= 0.0 && cfg.d_init < 1.0)) {
    throw std::invalid_argument("FitConfig: d_init must lie in [0,1)");
  }
  if (!(cfg.m2 > 0.0)) throw std::invalid_argument("FitConfig: m2 must be > 0");
  if (!(cfg.tau2_sq > 0.0)) {
    throw std::invalid_argument("FitConfig: tau2_sq must be > 0");
  }
  if (!(cfg.phi_init > 0.0) || !(cfg.phi_step > 0.0)) {
    throw std::invalid_argument("FitConfig: phi_init and phi_step must be > 0");
  }
  if (cfg.m_aux < 1) {
    throw std::invalid_argument("FitConfig: m_aux must be >= 1");
  }
}

SamplerState init_state(const MixedMatrix& m, const FitConfig& cfg, Rng&) {
  validate(cfg);
  SamplerState s;
  s.alpha = compute_intercepts(m);
  s.d = cfg.fix_d_zero ? 0.0 : cfg.d_init;

  const int n = static_cast<int>(m.n());
  const int p = static_cast<int>(m.p());

  // Centered per-cell latents (column means vanish because the intercept is
  // the mean of the same transform).
  ColMatrix w(n, p, 0.0);
  std::vector<int> proportion_cols, continuous_cols;
  for (int j = 0; j < p; ++j) {
    const ColumnType& t = m.types()[j];
    for (int i = 0; i < n; ++i) {
      w.at(i, j) = latent_cell(m.at(i, j), t) - s.alpha[j];
    }
    if (t.kind == ColumnKind::Proportion) proportion_cols.push_back(j);
    if (t.kind == ColumnKind::Continuous) continuous_cols.push_back(j);
  }

  // Every column starts as its own cluster. Its latent column is coarsened
  // into quantile bins — the initial grouping of cells — with one private
  // atom per bin; later sweeps regrow the shared atom table from here.
  // Starting at a data-matched state matters: a partition start that groups
  // columns before the scales below are adapted merges on size alone and
  // the chain cannot recover from the resulting single-cluster state.
  s.alloc = AllocationState::singletons(p);
  s.atoms = AtomState(n, cfg.m2, cfg.mu2, cfg.tau2_sq);
  s.atoms.theta = ColMatrix(n, p, 0.0);
  s.atoms.atom_of.assign(static_cast<std::size_t>(n) * p, 0);
  std::vector<int> order(n);
  for (int j = 0; j < p; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return w.at(a, j) < w.at(b, j); });
    const int g = std::min(kInitBins, n);
    for (int b = 0; b < g; ++b) {
      const int lo = b * n / g, hi = (b + 1) * n / g;
      if (lo >= hi) continue;
      double mean = 0.0;
      for (int t = lo; t < hi; ++t) mean += w.at(order[t], j);
      mean /= hi - lo;
      const int atom = static_cast<int>(s.atoms.atom_value.size());
      s.atoms.atom_value.push_back(mean);
      s.atoms.atom_count.push_back(hi - lo);
      for (int t = lo; t < hi; ++t) {
        s.atoms.theta.at(order[t], j) = mean;
        s.atoms.atom_of[s.atoms.cell_index(order[t], j)] = atom;
      }
    }
  }

  s.phi = init_dispersion(w, s.alpha, proportion_cols, cfg.phi_init);

  for (std::size_t j = 0; j < m.p(); ++j) {
    const ColumnType& t = m.types()[j];
    if (t.kind == ColumnKind::Ordinal && !s.cutoffs.count(t.levels)) {
      s.cutoffs.emplace(t.levels, Cutoffs::initial(t.levels));
    }
  }

  // Continuous noise scale: replicate pairs when available, otherwise the
  // pooled centered spread.
  double ss = 0.0;
  std::size_t cn = 0;
  for (int j : continuous_cols) {
    const double* wj = w.col(j);
    for (int i = 0; i < n; ++i) {
      ss += wj[i] * wj[i];
      ++cn;
    }
  }
  double fallback = (cn >= 2) ? std::sqrt(ss / (cn - 1)) : 1.0;
  if (!(fallback > 0.0)) fallback = 1.0;
  s.tau = init_noise_scale(w, continuous_cols, fallback);
  return s;
}

ChainTrace fit(const MixedMatrix& m, const FitConfig& cfg,
               const std::function<void(const TraceRecord&)>& sink) {
  validate(cfg);
  const int n = static_cast<int>(m.n());
  const int p = static_cast<int>(m.p());

  Rng root(cfg.seed);
  Rng init_rng = root.split(kInitStream);
  Rng state_rng = root.split(kStateStream);
  SamplerState s = init_state(m, cfg, init_rng);

  ColMatrix R(n, p), V(n, p, 1.0);
  std::vector<WorkingValue> wv(n);

  // Ordinal columns grouped by level count; observed categories as ints.
  std::map<int, std::vector<int>> ordinal_groups;
  std::vector<std::vector<int>> levels(p);
  std::vector<int> proportion_cols, continuous_cols;
  for (int j = 0; j < p; ++j) {
    const ColumnType& t = m.types()[j];
    if (t.kind == ColumnKind::Ordinal) {
      ordinal_groups[t.levels].push_back(j);
      levels[j].resize(n);
      for (int i = 0; i < n; ++i) {
        levels[j][i] = static_cast<int>(m.at(i, j));
      }
    } else if (t.kind == ColumnKind::Proportion) {
      proportion_cols.push_back(j);
    } else if (t.kind == ColumnKind::Continuous) {
      continuous_cols.push_back(j);
    }
  }

  ChainTrace trace;
  trace.config = cfg;
  trace.fingerprint = m.fingerprint();

  std::vector<double> buf_x, buf_eta;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    if (!cfg.prior_only) {
      for (int j = 0; j < p; ++j) {
        Rng col_rng = root.split(aug_key(iter, j));
        const ColumnType& t = m.types()[j];
        const Cutoffs* cuts = t.kind == ColumnKind::Ordinal
                                  ? &s.cutoffs.at(t.levels)
                                  : nullptr;
        const int k = s.alloc.label(j);
        augment_column(m.column(j), t, s.alpha[j],
                       std::span<const double>(s.atoms.theta.col(k), n), cuts,
                       s.phi, s.tau, col_rng, wv);
        const bool centered = t.kind == ColumnKind::Continuous;
        for (int i = 0; i < n; ++i) {
          R.at(i, j) = centered ? wv[i].z : wv[i].z - s.alpha[j];
          V.at(i, j) = wv[i].var;
        }
      }
    }

    const PdpParams pdp{cfg.m1, s.d};
    for (int j = 0; j < p; ++j) {
      sample_allocation_column(j, R, V, s.alloc, s.atoms, pdp, cfg.m_aux,
                               cfg.prior_only, state_rng);
    }
    sample_theta(s.alloc, s.atoms, R, V, cfg.prior_only, state_rng);

    if (!cfg.prior_only) {
      for (auto& [L, cols] : ordinal_groups) {
        buf_x.clear();
        buf_eta.clear();  // reused as the z buffer here
        std::vector<int> cats;
        for (int j : cols) {
          for (int i = 0; i < n; ++i) {
            buf_eta.push_back(R.at(i, j) + s.alpha[j]);
            cats.push_back(levels[j][i]);
          }
        }
        std::vector<double>& z = buf_eta;
        Cutoffs updated = sample_cutoffs(
            s.cutoffs.at(L), z,
            std::span<const int>(cats.data(), cats.size()), state_rng,
            &s.cutoff_skips);
        s.cutoffs.erase(L);
        s.cutoffs.emplace(L, std::move(updated));
      }
    }

    if (!proportion_cols.empty() || cfg.prior_only) {
      buf_x.clear();
      buf_eta.clear();
      if (!cfg.prior_only) {
        for (int j : proportion_cols) {
          const int k = s.alloc.label(j);
          for (int i = 0; i < n; ++i) {
            buf_x.push_back(m.at(i, j));
            buf_eta.push_back(s.alpha[j] + s.atoms.theta.at(i, k));
          }
        }
      }
      s.phi = sample_dispersion(s.phi, buf_x, buf_eta, cfg.phi_step, state_rng);
    }

    if (!continuous_cols.empty() && !cfg.prior_only) {
      buf_x.clear();
      for (int j : continuous_cols) {
        const int k = s.alloc.label(j);
        for (int i = 0; i < n; ++i) {
          buf_x.push_back(R.at(i, j) - s.atoms.theta.at(i, k));
        }
      }
      s.tau = sample_tau(buf_x, state_rng);
    }

    if (cfg.update_d && !cfg.fix_d_zero) {
      s.d = sample_discount(s.alloc, PdpParams{cfg.m1, s.d}, state_rng);
    }

    s.alloc.check_invariants();
    s.atoms.check_invariants();

    if (iter > cfg.burnin && (iter - cfg.burnin - 1) % cfg.thin == 0) {
      TraceRecord rec;
      rec.iter = iter;
      rec.c.resize(p);
      for (int j = 0; j < p; ++j) rec.c[j] = s.alloc.label(j) + 1;
      rec.q = s.alloc.q();
      rec.d = s.d;
      rec.phi = s.phi;
      rec.tau = s.tau;
      rec.log_eppf = pdp_log_eppf(s.alloc.sizes(), s.d, cfg.m1);
      if (sink) sink(rec);
      trace.records.push_back(std::move(rec));
    }
  }
  return trace;
}

void save_trace(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  nlohmann::json header{{"type", "header"},
                        {"version", kVersion},
                        {"fingerprint", trace.fingerprint},
                        {"config", config_to_json(trace.config)}};
  out << header.dump() << "\n";
  for (const TraceRecord& r : trace.records) {
    nlohmann::json rec{{"iter", r.iter},
                       {"c", r.c},
                       {"q", r.q},
                       {"d", encode_real(r.d)},
                       {"phi", encode_real(r.phi)},
                       {"tau", encode_real(r.tau)},
                       {"log_eppf", encode_real(r.log_eppf)}};
    out << rec.dump() << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

ChainTrace load_trace(const std::string& path, const MixedMatrix* expect) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  ChainTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  int last_iter = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": invalid JSON (" + e.what() + ")");
    }
    try {
      if (!have_header) {
        if (!j.contains("type") || j.at("type") != "header") {
          throw std::invalid_argument("first line must be the header object");
        }
        trace.fingerprint = j.at("fingerprint").get<std::string>();
        trace.config = config_from_json(j.at("config"));
        have_header = true;
        continue;
      }
      TraceRecord r;
      r.iter = j.at("iter").get<int>();
      r.c = j.at("c").get<std::vector<int>>();
      r.q = j.at("q").get<int>();
      r.d = decode_real(j.at("d"));
      r.phi = decode_real(j.at("phi"));
      r.tau = decode_real(j.at("tau"));
      r.log_eppf = decode_real(j.at("log_eppf"));
      if (r.iter <= last_iter) {
        throw std::invalid_argument("iteration numbers must increase");
      }
      last_iter = r.iter;
      std::vector<int> zero_based(r.c.size());
      for (std::size_t i = 0; i < r.c.size(); ++i) zero_based[i] = r.c[i] - 1;
      const AllocationState check =
          AllocationState::from_labels(std::move(zero_based));
      if (check.q() != r.q) {
        throw std::invalid_argument("q does not match the label vector");
      }
      trace.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  if (!have_header) {
    throw std::runtime_error(path + ": missing header line");
  }
  if (expect && expect->fingerprint() != trace.fingerprint) {
    throw std::runtime_error(path + ": data fingerprint mismatch (trace " +
                             trace.fingerprint + ", data " +
                             expect->fingerprint() + ")");
  }
  return trace;
}

}  // namespace mixclust
