#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mixclust/augment.hpp"
#include "mixclust/matrix.hpp"
#include "mixclust/mixed_matrix.hpp"
#include "mixclust/partition.hpp"

namespace mixclust {

struct FitConfig {
  int iterations = 15000;
  int burnin = 5000;
  int thin = 1;
  std::uint64_t seed = 0;

  double m1 = 20.0;       // partition prior mass
  double d_init = 0.3;    // starting discount
  double m2 = 11.0;       // latent-effect prior mass
  double mu2 = -0.18;     // latent-effect base mean
  double tau2_sq = 2.2;   // latent-effect base variance
  double phi_init = 1.0;  // starting beta dispersion
  double phi_step = 0.2;  // log-scale random-walk step for phi
  int m_aux = 3;          // candidate clusters per allocation update

  bool fix_d_zero = false;  // pin discount at 0 (pure Dirichlet process)
  bool update_d = true;     // resample the discount each sweep
  bool prior_only = false;  // drop all likelihood terms (diagnostics)
};

void validate(const FitConfig& cfg);

struct TraceRecord {
  int iter = 0;
  std::vector<int> c;  // 1-based cluster labels, contiguous 1..q
  int q = 0;
  double d = 0.0;
  double phi = 1.0;
  double tau = 1.0;
  double log_eppf = 0.0;
};

struct ChainTrace {
  FitConfig config;
  std::string fingerprint;  // of the data matrix the chain ran on
  std::vector<TraceRecord> records;
};

// Mutable sampler state, exposed for tests and diagnostics.
struct SamplerState {
  AllocationState alloc;
  AtomState atoms;
  std::map<int, Cutoffs> cutoffs;  // one set per distinct ordinal level count
  std::vector<double> alpha;       // fixed column intercepts
  double phi = 1.0;
  double tau = 1.0;
  double d = 0.3;
  int cutoff_skips = 0;  // degenerate threshold intervals left unchanged
};

// Initial state, a deterministic function of the data: every column is its
// own cluster, its cells grouped into latent-scale quantile bins with one
// private atom per bin (the regression-style start the sampler coarsens
// from). The beta dispersion and the continuous noise scale are estimated
// from nearest-neighbour replicate column pairs when such pairs exist
// (falling back to cfg.phi_init and the pooled continuous spread): starting
// both scales near the data keeps the first allocation sweeps
// likelihood-driven, which the chain cannot recover from getting wrong.
SamplerState init_state(const MixedMatrix& m, const FitConfig& cfg, Rng& rng);

// Runs the full chain. Sweep order: (1) refresh working values column by
// column on independent substreams, (2) reallocate every column, (3) update
// latent effects, (4) ordinal thresholds, (5) beta dispersion (when
// proportion columns exist), (6) continuous noise scale (when continuous
// columns exist), (7) discount. Post-burnin records are appended to the
// returned trace and, when given, streamed to `sink` as they appear.
ChainTrace fit(const MixedMatrix& m, const FitConfig& cfg,
               const std::function<void(const TraceRecord&)>& sink = {});

// Newline-delimited JSON: a header object carrying the config echo and the
// data fingerprint, then one object per record.
void save_trace(const ChainTrace& trace, const std::string& path);

// Loads a trace; verifies the fingerprint when `expect` is given. Corrupt
// lines and non-increasing iteration numbers are reported with the line
// number.
ChainTrace load_trace(const std::string& path,
                      const MixedMatrix* expect = nullptr);

}  // namespace mixclust
