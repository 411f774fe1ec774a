#include "mixclust/summarize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "mixclust/jsonio.hpp"

namespace mixclust {

namespace {

std::string format_double(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void check_records(const std::vector<TraceRecord>& records, std::size_t p) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: no retained samples");
  }
  for (const TraceRecord& r : records) {
    if (r.c.size() != p) {
      throw std::invalid_argument("summarize: record width mismatch");
    }
  }
}

}  // namespace

ColMatrix coclustering_matrix(const std::vector<TraceRecord>& records,
                              std::size_t p) {
  check_records(records, p);
  const int pi = static_cast<int>(p);
  ColMatrix acc(pi, pi, 0.0);
  for (const TraceRecord& r : records) {
    for (int j2 = 0; j2 < pi; ++j2) {
      const int c2 = r.c[j2];
      for (int j1 = 0; j1 < j2; ++j1) {
        if (r.c[j1] == c2) acc.at(j1, j2) += 1.0;
      }
    }
  }
  const double s = static_cast<double>(records.size());
  ColMatrix out(pi, pi, 0.0);
  for (int j2 = 0; j2 < pi; ++j2) {
    out.at(j2, j2) = 1.0;
    for (int j1 = 0; j1 < j2; ++j1) {
      const double v = acc.at(j1, j2) / s;
      out.at(j1, j2) = v;
      out.at(j2, j1) = v;
    }
  }
  return out;
}

std::vector<int> dahl_allocation(const std::vector<TraceRecord>& records,
                                 const ColMatrix& cocluster) {
  const std::size_t p = cocluster.rows;
  check_records(records, p);
  double best = std::numeric_limits<double>::infinity();
  const TraceRecord* pick = nullptr;
  for (const TraceRecord& r : records) {
    double loss = 0.0;
    for (std::size_t j2 = 0; j2 < p; ++j2) {
      const int c2 = r.c[j2];
      for (std::size_t j1 = 0; j1 < j2; ++j1) {
        const double e =
            (r.c[j1] == c2 ? 1.0 : 0.0) -
            cocluster.at(static_cast<int>(j1), static_cast<int>(j2));
        loss += e * e;
      }
    }
    if (loss < best) {
      best = loss;
      pick = &r;
    }
  }
  return pick->c;
}

double chi_accuracy(const std::vector<int>& estimate,
                    const std::vector<int>& truth,
                    const std::vector<std::size_t>& subset) {
  if (estimate.size() != truth.size()) {
    throw std::invalid_argument("chi_accuracy: length mismatch");
  }
  std::vector<std::size_t> idx = subset;
  if (idx.empty()) {
    idx.resize(estimate.size());
    for (std::size_t j = 0; j < estimate.size(); ++j) idx[j] = j;
  }
  for (std::size_t j : idx) {
    if (j >= estimate.size()) {
      throw std::invalid_argument("chi_accuracy: subset index out of range");
    }
  }
  if (idx.size() < 2) {
    throw std::invalid_argument("chi_accuracy: need at least two columns");
  }
  long long pairs = 0, disagreements = 0;
  for (std::size_t b = 1; b < idx.size(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      const bool same_est = estimate[idx[a]] == estimate[idx[b]];
      const bool same_true = truth[idx[a]] == truth[idx[b]];
      ++pairs;
      if (same_est != same_true) ++disagreements;
    }
  }
  return 1.0 - static_cast<double>(disagreements) / pairs;
}

double log_bayes_factor_discount(const std::vector<TraceRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("log_bayes_factor_discount: no samples");
  }
  std::size_t nonzero = 0;
  for (const TraceRecord& r : records) {
    if (r.d != 0.0) ++nonzero;
  }
  const std::size_t zero = records.size() - nonzero;
  if (zero == 0) return std::numeric_limits<double>::infinity();
  if (nonzero == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(nonzero) / zero);
}

std::pair<double, double> credible_interval(std::vector<double> samples,
                                            double level) {
  if (samples.empty()) {
    throw std::invalid_argument("credible_interval: no samples");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("credible_interval: level must be in (0,1)");
  }
  std::sort(samples.begin(), samples.end());
  const auto quantile = [&](double prob) {
    const double h = (samples.size() - 1) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= samples.size()) return samples.back();
    const double frac = h - lo;
    return samples[lo] + frac * (samples[lo + 1] - samples[lo]);
  };
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

SummaryReport summarize(const std::vector<TraceRecord>& records, std::size_t p,
                        const std::optional<std::vector<int>>& truth) {
  check_records(records, p);
  SummaryReport rep;
  rep.p = p;
  rep.samples = records.size();
  rep.cocluster = coclustering_matrix(records, p);
  rep.allocation = dahl_allocation(records, rep.cocluster);
  rep.q_hat = *std::max_element(rep.allocation.begin(), rep.allocation.end());

  std::map<int, int> qh;
  rep.d_samples.reserve(records.size());
  std::size_t zeros = 0;
  for (const TraceRecord& r : records) {
    ++qh[r.q];
    rep.d_samples.push_back(r.d);
    if (r.d == 0.0) ++zeros;
  }
  rep.q_hist.assign(qh.begin(), qh.end());
  rep.d_ci = credible_interval(rep.d_samples, 0.95);
  rep.d_zero_fraction = static_cast<double>(zeros) / records.size();
  rep.log_bf = log_bayes_factor_discount(records);
  if (truth) {
    rep.chi = chi_accuracy(rep.allocation, *truth);
  }
  return rep;
}

void write_summary(const SummaryReport& report,
                   const std::vector<std::string>& names,
                   const std::string& dir) {
  if (names.size() != report.p) {
    throw std::invalid_argument("write_summary: name count mismatch");
  }
  const auto open = [&](const std::string& file) {
    std::ofstream out(dir + "/" + file);
    if (!out) {
      throw std::runtime_error(dir + "/" + file + ": cannot open for writing");
    }
    return out;
  };

  {
    std::ofstream out = open("cocluster.csv");
    for (std::size_t i = 0; i < report.p; ++i) {
      for (std::size_t j = 0; j < report.p; ++j) {
        out << (j ? "," : "")
            << format_double(report.cocluster.at(static_cast<int>(i),
                                                 static_cast<int>(j)));
      }
      out << "\n";
    }
  }
  {
    std::ofstream out = open("allocation.csv");
    out << "name,cluster\n";
    for (std::size_t j = 0; j < report.p; ++j) {
      out << names[j] << "," << report.allocation[j] << "\n";
    }
  }
  {
    std::ofstream out = open("q_hist.csv");
    out << "q,count\n";
    for (const auto& [q, count] : report.q_hist) {
      out << q << "," << count << "\n";
    }
  }
  {
    std::ofstream out = open("d_density.csv");
    out << "bin_lo,bin_mid,bin_hi,density\n";
    constexpr int kBins = 50;
    std::vector<int> counts(kBins, 0);
    for (double d : report.d_samples) {
      int b = static_cast<int>(d * kBins);
      b = std::clamp(b, 0, kBins - 1);
      ++counts[b];
    }
    const double width = 1.0 / kBins;
    for (int b = 0; b < kBins; ++b) {
      const double lo = b * width;
      const double density = counts[b] / (width * report.d_samples.size());
      out << format_double(lo) << "," << format_double(lo + 0.5 * width) << ","
          << format_double(lo + width) << "," << format_double(density)
          << "\n";
    }
  }
  {
    std::ofstream out = open("report.json");
    std::vector<std::vector<std::string>> clusters(report.q_hat);
    for (std::size_t j = 0; j < report.p; ++j) {
      clusters[report.allocation[j] - 1].push_back(names[j]);
    }
    nlohmann::json j{{"p", report.p},
                     {"samples", report.samples},
                     {"q_hat", report.q_hat},
                     {"d_credible_interval",
                      {encode_real(report.d_ci.first),
                       encode_real(report.d_ci.second)}},
                     {"d_zero_fraction", report.d_zero_fraction},
                     {"log_bayes_factor", encode_real(report.log_bf)},
                     {"clusters", clusters}};
    if (report.chi) {
      j["chi"] = *report.chi;
      j["misclassification"] = 1.0 - *report.chi;
    }
    out << j.dump(2) << "\n";
  }
}

}  // namespace mixclust
