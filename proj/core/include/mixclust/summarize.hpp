#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixclust/matrix.hpp"
#include "mixclust/sampler.hpp"

namespace mixclust {

// Posterior co-clustering probabilities: entry (j1,j2) is the fraction of
// retained samples placing the two columns in the same cluster. Symmetric
// with unit diagonal.
ColMatrix coclustering_matrix(const std::vector<TraceRecord>& records,
                              std::size_t p);

// Least-squares allocation: the retained sample whose pair-agreement matrix
// is closest (squared Frobenius distance on the upper triangle) to the
// co-clustering matrix. Earliest qualifying sample wins ties. Returns
// 1-based labels.
std::vector<int> dahl_allocation(const std::vector<TraceRecord>& records,
                                 const ColMatrix& cocluster);

// Label-invariant pair-agreement accuracy between two allocations over the
// given column subset (0-based indices; empty means all columns):
//   1 - (taxicab distance between agreement indicators) / (pairs).
double chi_accuracy(const std::vector<int>& estimate,
                    const std::vector<int>& truth,
                    const std::vector<std::size_t>& subset = {});

// Lower bound on the log Bayes factor of discount > 0 against discount = 0:
// log(count(d != 0) / count(d == 0)) over retained samples, with +-inf when
// either count is zero (prior odds are even, so posterior odds bound the
// Bayes factor from below).
double log_bayes_factor_discount(const std::vector<TraceRecord>& records);

// Equal-tail credible interval with linear interpolation between order
// statistics. level is the central mass, e.g. 0.95.
std::pair<double, double> credible_interval(std::vector<double> samples,
                                            double level = 0.95);

struct SummaryReport {
  std::size_t p = 0;
  std::size_t samples = 0;
  std::vector<int> allocation;             // 1-based Dahl labels
  int q_hat = 0;                           // cluster count of `allocation`
  std::vector<std::pair<int, int>> q_hist; // (q, count), ascending in q
  std::vector<double> d_samples;
  std::pair<double, double> d_ci{0.0, 0.0};
  double d_zero_fraction = 0.0;
  double log_bf = 0.0;                     // may be +-inf
  std::optional<double> chi;               // set when truth is supplied
  ColMatrix cocluster;
};

// Full posterior summary over pooled records (from one or more chains).
SummaryReport summarize(const std::vector<TraceRecord>& records, std::size_t p,
                        const std::optional<std::vector<int>>& truth = {});

// Writes cocluster.csv, allocation.csv, q_hist.csv, d_density.csv and
// report.json into `dir` (which must exist). `names` labels the columns.
void write_summary(const SummaryReport& report,
                   const std::vector<std::string>& names,
                   const std::string& dir);

}  // namespace mixclust
