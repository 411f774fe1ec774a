// mixclust: command-line driver for the mixed-type biclustering pipeline.
//
// Subcommands:
//   simulate   draw a synthetic mixed-type matrix plus ground truth
//   fit        run one or more MCMC chains on a data matrix
//   summarize  pool chain traces into posterior summaries
//   eval       pair-agreement accuracy of an allocation against truth
//   betareg    fixed-dispersion beta regression (IRLS) on a plain CSV
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Every executed
// subcommand writes a manifest.json (into --out when the subcommand has one,
// otherwise the working directory) recording the resolved flags, input
// fingerprints and wall time; on usage errors a minimal manifest is still
// attempted in the working directory.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixclust/augment.hpp"
#include "mixclust/jsonio.hpp"
#include "mixclust/mixed_matrix.hpp"
#include "mixclust/rng.hpp"
#include "mixclust/sampler.hpp"
#include "mixclust/simgen.hpp"
#include "mixclust/summarize.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kChainStream = 0x636861696e000000ULL;  // "chain"

// Command-line misuse (bad flags, malformed config files, mismatched
// inputs); mapped to exit code 2 instead of 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// Manifest plumbing

json base_manifest(const std::string& command) {
  json man;
  man["command"] = command;
  man["version"] = kVersion;
  man["flags"] = json::object();
  man["inputs"] = json::object();
  man["outputs"] = json::array();
  return man;
}

// Best effort: a failing manifest write must not mask the run's own status.
void write_manifest(const json& man, const fs::path& dir) {
  const auto dump = [&](const fs::path& d) {
    std::ofstream out(d / "manifest.json");
    if (!out) return false;
    out << man.dump(2) << "\n";
    return out.good();
  };
  try {
    if (dump(dir)) return;
  } catch (...) {
  }
  try {
    dump(fs::current_path());
  } catch (...) {
  }
}

// Runs a subcommand body, fills in status / wall time, writes the manifest
// whether the body succeeded or threw, and maps exceptions to exit codes.
int run_guarded(json& man, const fs::path& manifest_dir,
                const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    body();
    man["status"] = "ok";
  } catch (const UsageError& e) {
    man["status"] = "error";
    man["error"] = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    man["status"] = "error";
    man["error"] = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  }
  const std::chrono::duration<double> dt =
      std::chrono::steady_clock::now() - t0;
  man["wall_seconds"] = dt.count();
  write_manifest(man, manifest_dir);
  return code;
}

// ---------------------------------------------------------------------------
// JSON config files: same keys as the long flags, flags win on conflict.
// Implemented as a pre-parse pass that rewrites the bound defaults, so a
// later command-line occurrence simply overwrites the file's value.

using ConfigTable = std::map<std::string, std::function<void(const json&)>>;

void apply_config_file(const std::string& path, const ConfigTable& keys) {
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw UsageError("config file " + path + ": expected a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw UsageError("config file " + path + ": unknown key '" + key + "'");
    }
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw UsageError("config file " + path + ": key '" + key +
                       "': " + e.what());
    }
  }
}

std::string scan_config_flag(int argc, char** argv) {
  for (int i = 2; i < argc; ++i) {
    const std::string s = argv[i];
    if (s == "--config" && i + 1 < argc) return argv[i + 1];
    if (s.rfind("--config=", 0) == 0) return s.substr(9);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Small file helpers shared by the subcommands

// Allocation files: optional "name,cluster" header, then one row per column
// whose last comma-separated field is the integer label.
std::vector<int> read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open allocation file: " + path);
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    const std::string field =
        pos == std::string::npos ? line : line.substr(pos + 1);
    int value = 0;
    const auto r =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (r.ec != std::errc{} || r.ptr != field.data() + field.size()) {
      if (lineno == 1) continue;  // header row
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": cannot parse label '" + field + "'");
    }
    labels.push_back(value);
  }
  if (labels.empty()) {
    throw std::runtime_error(path + ": no labels found");
  }
  return labels;
}

void write_labels_csv(const std::string& path,
                      const std::vector<std::string>& names,
                      const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "name,cluster\n";
  for (std::size_t j = 0; j < labels.size(); ++j) {
    out << names[j] << "," << labels[j] << "\n";
  }
}

std::vector<std::size_t> parse_subset(const std::string& text,
                                      std::size_t p) {
  std::vector<std::size_t> subset;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int idx = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
      throw UsageError("--subset: cannot parse index '" + tok + "'");
    }
    if (idx < 1 || static_cast<std::size_t>(idx) > p) {
      throw UsageError("--subset: index " + tok + " out of range 1.." +
                       std::to_string(p));
    }
    subset.push_back(static_cast<std::size_t>(idx - 1));
  }
  return subset;
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "v" + std::to_string(j + 1);
  return names;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario;
  int n = 0;  // 0 keeps the scenario preset
  int p = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
};

int run_simulate(const SimulateArgs& a) {
  json man = base_manifest("simulate");
  return run_guarded(man, a.out, [&] {
    mixclust::SimConfig cfg = mixclust::scenario(a.scenario);
    if (a.n > 0) cfg.n = a.n;
    if (a.p > 0) cfg.p = a.p;
    cfg.seed = a.seed;
    try {
      mixclust::validate(cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    man["seed"] = cfg.seed;
    man["flags"] = {{"scenario", a.scenario}, {"n", cfg.n},     {"p", cfg.p},
                    {"seed", cfg.seed},       {"out", a.out}};

    fs::create_directories(a.out);
    mixclust::Rng rng(cfg.seed);
    auto [matrix, truth] = mixclust::generate_data(cfg, rng);

    const fs::path dir(a.out);
    matrix.save_csv((dir / "data.csv").string());
    write_labels_csv((dir / "truth_c.csv").string(), matrix.names(),
                     truth.labels);

    std::ofstream theta_out(dir / "truth_theta.csv");
    if (!theta_out) {
      throw std::runtime_error("cannot write " +
                               (dir / "truth_theta.csv").string());
    }
    for (int k = 0; k < truth.q0; ++k) {
      theta_out << (k ? "," : "") << "theta_" << (k + 1);
    }
    theta_out << "\n";
    for (int i = 0; i < cfg.n; ++i) {
      for (int k = 0; k < truth.q0; ++k) {
        theta_out << (k ? "," : "") << format_double(truth.theta.at(i, k));
      }
      theta_out << "\n";
    }

    json cfg_json{{"scenario", a.scenario},
                  {"n", cfg.n},
                  {"p", cfg.p},
                  {"seed", cfg.seed},
                  {"m1", cfg.m1},
                  {"d", cfg.d},
                  {"m2", cfg.m2},
                  {"mu2", cfg.mu2},
                  {"tau2_sq", cfg.tau2_sq},
                  {"alpha_cont", cfg.alpha_cont},
                  {"tau", cfg.tau},
                  {"phi", cfg.phi},
                  {"mix",
                   {{"binary", cfg.mix.binary},
                    {"ordinal", cfg.mix.ordinal},
                    {"count", cfg.mix.count},
                    {"proportion", cfg.mix.proportion},
                    {"continuous", cfg.mix.continuous}}}};
    cfg_json["gamma"] = json::array();
    for (double g : cfg.gamma) cfg_json["gamma"].push_back(mixclust::encode_real(g));
    std::ofstream cfg_out(dir / "config.json");
    cfg_out << cfg_json.dump(2) << "\n";

    man["inputs"] = json::object();
    man["outputs"] = {"data.csv", "truth_c.csv", "truth_theta.csv",
                      "config.json"};
    man["data_fingerprint"] = matrix.fingerprint();

    std::cout << "simulate: " << cfg.n << "x" << cfg.p << " matrix, scenario "
              << a.scenario << ", " << truth.q0 << " true clusters, seed "
              << cfg.seed << " -> " << a.out << "\n";
  });
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  std::string out = ".";
  int chains = 1;
  bool no_update_d = false;
  mixclust::FitConfig cfg;
  std::string config;
};

int run_fit(FitArgs& a) {
  json man = base_manifest("fit");
  return run_guarded(man, a.out, [&] {
    if (a.chains < 1) throw UsageError("--chains must be at least 1");
    a.cfg.update_d = !a.no_update_d;
    try {
      mixclust::validate(a.cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    man["seed"] = a.cfg.seed;
    man["flags"] = {{"data", a.data},
                    {"out", a.out},
                    {"chains", a.chains},
                    {"iters", a.cfg.iterations},
                    {"burnin", a.cfg.burnin},
                    {"thin", a.cfg.thin},
                    {"seed", a.cfg.seed},
                    {"m1", a.cfg.m1},
                    {"d-init", a.cfg.d_init},
                    {"m2", a.cfg.m2},
                    {"mu2", a.cfg.mu2},
                    {"tau2-sq", a.cfg.tau2_sq},
                    {"phi-init", a.cfg.phi_init},
                    {"phi-step", a.cfg.phi_step},
                    {"m-aux", a.cfg.m_aux},
                    {"fix-d-zero", a.cfg.fix_d_zero},
                    {"no-update-d", a.no_update_d},
                    {"prior-only", a.cfg.prior_only}};

    fs::create_directories(a.out);
    const fs::path dir(a.out);

    const mixclust::MixedMatrix matrix = mixclust::MixedMatrix::load_csv(a.data);
    man["inputs"][a.data] = matrix.fingerprint();

    std::vector<mixclust::ChainTrace> traces(a.chains);
    std::vector<std::exception_ptr> failures(a.chains);
    std::vector<std::thread> workers;
    workers.reserve(a.chains);
    for (int i = 0; i < a.chains; ++i) {
      workers.emplace_back([&, i] {
        try {
          mixclust::FitConfig cfg = a.cfg;
          if (a.chains > 1) {
            cfg.seed = mixclust::Rng(a.cfg.seed)
                           .split(kChainStream ^ static_cast<std::uint64_t>(i))
                           .seed();
          }
          traces[i] = mixclust::fit(matrix, cfg);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }

    for (int i = 0; i < a.chains; ++i) {
      const std::string name =
          a.chains == 1 ? "trace.ndjson"
                        : "trace.chain" + std::to_string(i) + ".ndjson";
      mixclust::save_trace(traces[i], (dir / name).string());
      man["outputs"].push_back(name);
      std::cout << "fit: chain " << i << ", seed " << traces[i].config.seed
                << ", " << traces[i].records.size() << " samples -> "
                << (dir / name).string() << "\n";
    }
  });
}

// ---------------------------------------------------------------------------
// summarize

struct SummarizeArgs {
  std::vector<std::string> traces;
  std::string truth;
  std::string out;
  std::string config;
};

int run_summarize(const SummarizeArgs& a) {
  json man = base_manifest("summarize");
  return run_guarded(man, a.out, [&] {
    man["flags"] = {{"trace", a.traces}, {"out", a.out}, {"truth", a.truth}};

    std::vector<mixclust::TraceRecord> pooled;
    std::string fingerprint;
    for (const auto& path : a.traces) {
      mixclust::ChainTrace t = mixclust::load_trace(path);
      if (fingerprint.empty()) {
        fingerprint = t.fingerprint;
      } else if (t.fingerprint != fingerprint) {
        throw std::runtime_error(path +
                                 ": trace fingerprint does not match the "
                                 "first trace; chains ran on different data");
      }
      man["inputs"][path] = t.fingerprint;
      pooled.insert(pooled.end(), t.records.begin(), t.records.end());
    }
    if (pooled.empty()) {
      throw std::runtime_error("no retained samples across the given traces");
    }
    const std::size_t p = pooled.front().c.size();

    std::optional<std::vector<int>> truth;
    if (!a.truth.empty()) {
      truth = read_labels_csv(a.truth);
      if (truth->size() != p) {
        throw std::runtime_error(a.truth + ": has " +
                                 std::to_string(truth->size()) +
                                 " labels but traces have " +
                                 std::to_string(p) + " columns");
      }
    }

    const mixclust::SummaryReport report =
        mixclust::summarize(pooled, p, truth);
    fs::create_directories(a.out);
    mixclust::write_summary(report, default_names(p), a.out);
    man["outputs"] = {"cocluster.csv", "allocation.csv", "q_hist.csv",
                      "d_density.csv", "report.json"};

    std::cout << "summarize: " << report.samples << " samples pooled from "
              << a.traces.size() << " trace(s)\n";
    std::cout << "  q_hat " << report.q_hat << ", d 95% CI ["
              << report.d_ci.first << ", " << report.d_ci.second
              << "], P(d=0) " << report.d_zero_fraction << "\n";
    std::cout << "  log Bayes factor (d>0 vs d=0): " << report.log_bf << "\n";
    if (report.chi) {
      std::cout << "  chi vs truth: " << *report.chi << "\n";
    }
    std::cout << "  wrote 5 files -> " << a.out << "\n";
  });
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string estimate;
  std::string truth;
  std::string subset;
  std::string config;
};

int run_eval(const EvalArgs& a) {
  json man = base_manifest("eval");
  return run_guarded(man, fs::current_path(), [&] {
    man["flags"] = {{"estimate", a.estimate},
                    {"truth", a.truth},
                    {"subset", a.subset}};

    const std::vector<int> est = read_labels_csv(a.estimate);
    const std::vector<int> truth = read_labels_csv(a.truth);
    if (est.size() != truth.size()) {
      throw UsageError("allocation lengths differ: " + a.estimate + " has " +
                       std::to_string(est.size()) + ", " + a.truth + " has " +
                       std::to_string(truth.size()));
    }
    const std::vector<std::size_t> subset =
        a.subset.empty() ? std::vector<std::size_t>{}
                         : parse_subset(a.subset, est.size());

    double chi = 0.0;
    try {
      chi = mixclust::chi_accuracy(est, truth, subset);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    char line[64];
    std::snprintf(line, sizeof(line), "chi %.6f\n", chi);
    std::cout << line;
    std::snprintf(line, sizeof(line), "misclassification %.6f\n", 1.0 - chi);
    std::cout << line;

    man["chi"] = chi;
    man["misclassification"] = 1.0 - chi;
  });
}

// ---------------------------------------------------------------------------
// betareg

struct BetaregArgs {
  std::string data;
  double phi = 0.0;
  double tol = 1e-8;
  int maxit = 100;
  std::string config;
};

// Plain numeric CSV with a header row: first column is the response, the
// remaining columns form the design matrix verbatim (no implicit intercept).
void read_numeric_csv(const std::string& path, std::vector<double>& y,
                      std::vector<double>& x, std::size_t& k) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  int lineno = 0;
  k = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header row
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": cannot parse '" + tok + "'");
    }
    if (row.size() < 2) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": need a response plus at least one column");
    }
    if (k == 0) {
      k = row.size() - 1;
    } else if (row.size() - 1 != k) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": expected " + std::to_string(k + 1) +
                               " fields, found " + std::to_string(row.size()));
    }
    y.push_back(row[0]);
    x.insert(x.end(), row.begin() + 1, row.end());
  }
  if (y.empty()) throw std::runtime_error(path + ": no data rows");
}

int run_betareg(const BetaregArgs& a) {
  json man = base_manifest("betareg");
  return run_guarded(man, fs::current_path(), [&] {
    man["flags"] = {{"data", a.data},
                    {"phi", a.phi},
                    {"tol", a.tol},
                    {"maxit", a.maxit}};

    std::vector<double> y;
    std::vector<double> x;
    std::size_t k = 0;
    read_numeric_csv(a.data, y, x, k);

    const auto emit = [](const std::vector<double>& beta, int iterations,
                         bool converged, double score_norm) {
      json out{{"coefficients", beta},
               {"iterations", iterations},
               {"converged", converged},
               {"final_score_norm", score_norm}};
      std::cout << out.dump(2) << "\n";
    };

    try {
      const mixclust::IrlsResult fit =
          mixclust::irls_beta_fit(y, x, k, a.phi, a.tol, a.maxit);
      emit(fit.beta, fit.iterations, fit.converged, fit.score_norm);
      man["converged"] = true;
    } catch (const mixclust::IrlsError& e) {
      emit(e.last_beta, e.iterations, false, e.score_norm);
      throw std::runtime_error(std::string("betareg: ") + e.what());
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"mixed-type biclustering via nested partition priors"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a synthetic dataset");
  sim_cmd->add_option("--scenario", sim.scenario,
                      "binary|ordinal|count|proportion|continuous|"
                      "uniform-mix|benchmark-mix")
      ->required();
  sim_cmd->add_option("--n", sim.n, "rows (default: scenario preset)");
  sim_cmd->add_option("--p", sim.p, "columns (default: scenario preset)");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--out", sim.out, "output directory");
  sim_cmd->add_option("--config", sim.config, "JSON config file");
  const ConfigTable sim_keys{
      {"scenario", [&](const json& v) { sim.scenario = v.get<std::string>(); }},
      {"n", [&](const json& v) { sim.n = v.get<int>(); }},
      {"p", [&](const json& v) { sim.p = v.get<int>(); }},
      {"seed", [&](const json& v) { sim.seed = v.get<std::uint64_t>(); }},
      {"out", [&](const json& v) { sim.out = v.get<std::string>(); }}};

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "run the MCMC sampler");
  fit_cmd->add_option("--data", fit.data, "type-tagged CSV matrix")
      ->required();
  fit_cmd->add_option("--out", fit.out, "output directory");
  fit_cmd->add_option("--chains", fit.chains, "independent chains");
  fit_cmd->add_option("--iters", fit.cfg.iterations, "total sweeps");
  fit_cmd->add_option("--burnin", fit.cfg.burnin, "discarded sweeps");
  fit_cmd->add_option("--thin", fit.cfg.thin, "keep every thin-th sweep");
  fit_cmd->add_option("--seed", fit.cfg.seed, "random seed");
  fit_cmd->add_option("--m1", fit.cfg.m1, "partition prior mass");
  fit_cmd->add_option("--d-init", fit.cfg.d_init, "starting discount");
  fit_cmd->add_option("--m2", fit.cfg.m2, "latent-effect prior mass");
  fit_cmd->add_option("--mu2", fit.cfg.mu2, "latent-effect base mean");
  fit_cmd->add_option("--tau2-sq", fit.cfg.tau2_sq,
                      "latent-effect base variance");
  fit_cmd->add_option("--phi-init", fit.cfg.phi_init,
                      "starting beta dispersion");
  fit_cmd->add_option("--phi-step", fit.cfg.phi_step,
                      "dispersion random-walk step");
  fit_cmd->add_option("--m-aux", fit.cfg.m_aux,
                      "candidate clusters per allocation update");
  fit_cmd->add_flag("--fix-d-zero", fit.cfg.fix_d_zero,
                    "pin the discount at zero");
  fit_cmd->add_flag("--no-update-d", fit.no_update_d,
                    "freeze the discount at --d-init");
  fit_cmd->add_flag("--prior-only", fit.cfg.prior_only,
                    "drop all likelihood terms (diagnostics)");
  fit_cmd->add_option("--config", fit.config, "JSON config file");
  const ConfigTable fit_keys{
      {"data", [&](const json& v) { fit.data = v.get<std::string>(); }},
      {"out", [&](const json& v) { fit.out = v.get<std::string>(); }},
      {"chains", [&](const json& v) { fit.chains = v.get<int>(); }},
      {"iters", [&](const json& v) { fit.cfg.iterations = v.get<int>(); }},
      {"burnin", [&](const json& v) { fit.cfg.burnin = v.get<int>(); }},
      {"thin", [&](const json& v) { fit.cfg.thin = v.get<int>(); }},
      {"seed",
       [&](const json& v) { fit.cfg.seed = v.get<std::uint64_t>(); }},
      {"m1", [&](const json& v) { fit.cfg.m1 = v.get<double>(); }},
      {"d-init", [&](const json& v) { fit.cfg.d_init = v.get<double>(); }},
      {"m2", [&](const json& v) { fit.cfg.m2 = v.get<double>(); }},
      {"mu2", [&](const json& v) { fit.cfg.mu2 = v.get<double>(); }},
      {"tau2-sq", [&](const json& v) { fit.cfg.tau2_sq = v.get<double>(); }},
      {"phi-init", [&](const json& v) { fit.cfg.phi_init = v.get<double>(); }},
      {"phi-step", [&](const json& v) { fit.cfg.phi_step = v.get<double>(); }},
      {"m-aux", [&](const json& v) { fit.cfg.m_aux = v.get<int>(); }},
      {"fix-d-zero",
       [&](const json& v) { fit.cfg.fix_d_zero = v.get<bool>(); }},
      {"no-update-d",
       [&](const json& v) { fit.no_update_d = v.get<bool>(); }},
      {"prior-only",
       [&](const json& v) { fit.cfg.prior_only = v.get<bool>(); }}};

  SummarizeArgs summ;
  CLI::App* summ_cmd =
      app.add_subcommand("summarize", "pool traces into posterior summaries");
  summ_cmd->add_option("--trace", summ.traces, "trace file (repeatable)")
      ->required();
  summ_cmd->add_option("--out", summ.out, "output directory")->required();
  summ_cmd->add_option("--truth", summ.truth, "true allocation CSV");
  summ_cmd->add_option("--config", summ.config, "JSON config file");
  const ConfigTable summ_keys{
      {"trace",
       [&](const json& v) {
         summ.traces.clear();
         if (v.is_string()) {
           summ.traces.push_back(v.get<std::string>());
         } else {
           summ.traces = v.get<std::vector<std::string>>();
         }
       }},
      {"out", [&](const json& v) { summ.out = v.get<std::string>(); }},
      {"truth", [&](const json& v) { summ.truth = v.get<std::string>(); }}};

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "pair-agreement accuracy of an allocation against truth");
  eval_cmd->add_option("estimate", ev.estimate, "estimated allocation CSV")
      ->required();
  eval_cmd->add_option("truth", ev.truth, "true allocation CSV")->required();
  eval_cmd->add_option("--subset", ev.subset,
                       "comma-separated 1-based column indices");
  eval_cmd->add_option("--config", ev.config, "JSON config file");
  const ConfigTable eval_keys{
      {"estimate", [&](const json& v) { ev.estimate = v.get<std::string>(); }},
      {"truth", [&](const json& v) { ev.truth = v.get<std::string>(); }},
      {"subset", [&](const json& v) {
         if (v.is_string()) {
           ev.subset = v.get<std::string>();
         } else {
           std::string joined;
           for (const auto& e : v) {
             if (!joined.empty()) joined += ",";
             joined += std::to_string(e.get<int>());
           }
           ev.subset = joined;
         }
       }}};

  BetaregArgs br;
  CLI::App* br_cmd = app.add_subcommand(
      "betareg", "fixed-dispersion beta regression via IRLS");
  br_cmd->add_option("--data", br.data, "CSV: response then covariates")
      ->required();
  br_cmd->add_option("--phi", br.phi, "fixed dispersion")->required();
  br_cmd->add_option("--tol", br.tol, "coefficient-change tolerance");
  br_cmd->add_option("--maxit", br.maxit, "iteration cap");
  br_cmd->add_option("--config", br.config, "JSON config file");
  const ConfigTable br_keys{
      {"data", [&](const json& v) { br.data = v.get<std::string>(); }},
      {"phi", [&](const json& v) { br.phi = v.get<double>(); }},
      {"tol", [&](const json& v) { br.tol = v.get<double>(); }},
      {"maxit", [&](const json& v) { br.maxit = v.get<int>(); }}};

  const auto minimal_manifest = [&](const std::string& message) {
    json man = base_manifest(argc > 1 ? argv[1] : "");
    man["status"] = "error";
    man["error"] = message;
    man["wall_seconds"] = 0.0;
    write_manifest(man, fs::current_path());
  };

  try {
    const std::string config_path = scan_config_flag(argc, argv);
    if (!config_path.empty() && argc > 1) {
      const std::string sub = argv[1];
      if (sub == "simulate") apply_config_file(config_path, sim_keys);
      if (sub == "fit") apply_config_file(config_path, fit_keys);
      if (sub == "summarize") apply_config_file(config_path, summ_keys);
      if (sub == "eval") apply_config_file(config_path, eval_keys);
      if (sub == "betareg") apply_config_file(config_path, br_keys);
    }
    app.parse(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    minimal_manifest(e.what());
    return 2;
  } catch (const CLI::ParseError& e) {
    const int cli_code = app.exit(e);
    if (cli_code == 0) return 0;  // --help / --version
    minimal_manifest(e.what());
    return 2;
  }

  if (*sim_cmd) return run_simulate(sim);
  if (*fit_cmd) return run_fit(fit);
  if (*summ_cmd) return run_summarize(summ);
  if (*eval_cmd) return run_eval(ev);
  if (*br_cmd) return run_betareg(br);
  return 2;  // unreachable: require_subcommand(1)
}
