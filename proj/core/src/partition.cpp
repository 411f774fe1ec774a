#include "mixclust/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixclust/distributions.hpp"

namespace mixclust {

namespace {

// Draws an index from unnormalized log weights.
int sample_log_weights(const std::vector<double>& lw, Rng& rng) {
  const double m = *std::max_element(lw.begin(), lw.end());
  double total = 0.0;
  for (double w : lw) total += std::exp(w - m);
  double r = rng.uniform() * total;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    r -= std::exp(lw[i] - m);
    if (r <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(lw.size()) - 1;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Exact log likelihood of proportions x under Beta(mu*phi, (1-mu)*phi)
// with mu = logistic(eta), up to no dropped terms.
double beta_log_lik(double phi, std::span<const double> x,
                    std::span<const double> eta) {
  double ll = x.size() * std::lgamma(phi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mu = logistic(eta[i]);
    const double a = mu * phi;
    const double b = (1.0 - mu) * phi;
    ll += -std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x[i]) +
          (b - 1.0) * std::log1p(-x[i]);
  }
  return ll;
}

}  // namespace

void validate(const PdpParams& pdp) {
  if (!(pdp.mass > 0.0)) {
    throw std::invalid_argument("PdpParams: mass must be > 0");
  }
  if (!(pdp.discount >= 0.0 && pdp.discount < 1.0)) {
    throw std::invalid_argument("PdpParams: discount must lie in [0,1)");
  }
}

std::vector<double> pdp_predictive_weights(const std::vector<int>& sizes,
                                           double discount, double mass) {
  validate(PdpParams{mass, discount});
  std::vector<double> w(sizes.size() + 1);
  double total = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) {
      throw std::invalid_argument("pdp_predictive_weights: empty cluster");
    }
    w[k] = sizes[k] - discount;
    total += w[k];
  }
  w.back() = mass + static_cast<double>(sizes.size()) * discount;
  total += w.back();
  for (double& x : w) x /= total;
  return w;
}

double pdp_log_eppf(const std::vector<int>& sizes, double discount,
                    double mass) {
  validate(PdpParams{mass, discount});
  const int q = static_cast<int>(sizes.size());
  long long p = 0;
  double lp = 0.0;
  for (int k = 0; k < q; ++k) {
    if (sizes[k] < 1) {
      throw std::invalid_argument("pdp_log_eppf: empty cluster");
    }
    p += sizes[k];
    for (int t = 1; t < sizes[k]; ++t) {
      lp += std::log(t - discount);
    }
  }
  for (int k = 1; k < q; ++k) {
    lp += std::log(mass + k * discount);
  }
  for (long long t = 1; t < p; ++t) {
    lp -= std::log(mass + static_cast<double>(t));
  }
  return lp;
}

AllocationState AllocationState::singletons(int p) {
  if (p < 1) throw std::invalid_argument("AllocationState: p must be >= 1");
  AllocationState s;
  s.labels_.resize(p);
  for (int j = 0; j < p; ++j) s.labels_[j] = j;
  s.sizes_.assign(p, 1);
  return s;
}

AllocationState AllocationState::from_labels(std::vector<int> labels) {
  if (labels.empty()) {
    throw std::invalid_argument("AllocationState: empty label vector");
  }
  const int q = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<int> sizes(q, 0);
  for (int c : labels) {
    if (c < 0 || c >= q) {
      throw std::invalid_argument("AllocationState: label out of range");
    }
    ++sizes[c];
  }
  for (int k = 0; k < q; ++k) {
    if (sizes[k] == 0) {
      throw std::invalid_argument(
          "AllocationState: labels must be contiguous");
    }
  }
  AllocationState s;
  s.labels_ = std::move(labels);
  s.sizes_ = std::move(sizes);
  return s;
}

int AllocationState::remove_column(int j) {
  const int k = labels_.at(j);
  if (k < 0) throw std::logic_error("remove_column: column already detached");
  labels_[j] = -1;
  if (--sizes_[k] > 0) return -1;
  sizes_.erase(sizes_.begin() + k);
  for (int& c : labels_) {
    if (c > k) --c;
  }
  return k;
}

void AllocationState::assign_column(int j, int k) {
  if (labels_.at(j) != -1) {
    throw std::logic_error("assign_column: column already attached");
  }
  if (k < 0 || k > q()) throw std::logic_error("assign_column: bad cluster");
  if (k == q()) {
    sizes_.push_back(1);
  } else {
    ++sizes_[k];
  }
  labels_[j] = k;
}

void AllocationState::check_invariants() const {
  std::vector<int> counts(sizes_.size(), 0);
  for (int c : labels_) {
    if (c < 0 || c >= q()) {
      throw std::logic_error("AllocationState: label out of range");
    }
    ++counts[c];
  }
  for (int k = 0; k < q(); ++k) {
    if (counts[k] != sizes_[k] || sizes_[k] <= 0) {
      throw std::logic_error("AllocationState: size bookkeeping broken");
    }
  }
}

AtomState::UrnColumn AtomState::draw_urn_column(Rng& rng) const {
  UrnColumn uc;
  uc.values.resize(n);
  uc.atom_ref.resize(n);
  std::vector<int> extra(atom_value.size(), 0);
  std::vector<int> fresh_count;
  const double base_total = static_cast<double>(total_cells());
  const double sd = std::sqrt(base_var);
  for (int i = 0; i < n; ++i) {
    double r = rng.uniform() * (base_total + i + mass);
    int chosen = -1;
    for (std::size_t a = 0; a < atom_value.size(); ++a) {
      r -= atom_count[a] + extra[a];
      if (r <= 0.0) {
        chosen = static_cast<int>(a);
        break;
      }
    }
    if (chosen >= 0) {
      ++extra[chosen];
      uc.values[i] = atom_value[chosen];
      uc.atom_ref[i] = chosen;
      continue;
    }
    int fresh_idx = -1;
    for (std::size_t t = 0; t < uc.fresh.size(); ++t) {
      r -= fresh_count[t];
      if (r <= 0.0) {
        fresh_idx = static_cast<int>(t);
        break;
      }
    }
    if (fresh_idx < 0) {
      uc.fresh.push_back(base_mean + sd * rng.normal());
      fresh_count.push_back(0);
      fresh_idx = static_cast<int>(uc.fresh.size()) - 1;
    }
    ++fresh_count[fresh_idx];
    uc.values[i] = uc.fresh[fresh_idx];
    uc.atom_ref[i] = -1 - fresh_idx;
  }
  return uc;
}

void AtomState::append_column(const UrnColumn& column) {
  if (static_cast<int>(column.values.size()) != n) {
    throw std::invalid_argument("append_column: wrong length");
  }
  std::vector<int> fresh_map(column.fresh.size(), -1);
  for (int i = 0; i < n; ++i) {
    int ref = column.atom_ref[i];
    if (ref < 0) {
      const int t = -1 - ref;
      if (fresh_map[t] < 0) {
        fresh_map[t] = static_cast<int>(atom_value.size());
        atom_value.push_back(column.fresh[t]);
        atom_count.push_back(0);
      }
      ref = fresh_map[t];
    }
    ++atom_count[ref];
    atom_of.push_back(ref);
    theta.data.push_back(column.values[i]);
  }
  ++theta.cols;
}

void AtomState::erase_column(int k) {
  if (k < 0 || k >= q()) throw std::logic_error("erase_column: bad index");
  const std::size_t begin = static_cast<std::size_t>(k) * n;
  for (std::size_t c = begin; c < begin + n; ++c) {
    --atom_count[atom_of[c]];
  }
  atom_of.erase(atom_of.begin() + begin, atom_of.begin() + begin + n);
  theta.data.erase(theta.data.begin() + begin, theta.data.begin() + begin + n);
  --theta.cols;
  // Compact away emptied atoms.
  std::vector<int> remap(atom_value.size());
  int kept = 0;
  for (std::size_t a = 0; a < atom_value.size(); ++a) {
    remap[a] = kept;
    if (atom_count[a] > 0) {
      atom_value[kept] = atom_value[a];
      atom_count[kept] = atom_count[a];
      ++kept;
    }
  }
  atom_value.resize(kept);
  atom_count.resize(kept);
  for (int& a : atom_of) a = remap[a];
}

void AtomState::recenter() {
  const int cells = total_cells();
  if (cells == 0) return;
  double mean = 0.0;
  for (double t : theta.data) mean += t;
  mean /= cells;
  for (double& v : atom_value) v -= mean;
  for (double& t : theta.data) t -= mean;
}

void AtomState::check_invariants() const {
  if (static_cast<int>(atom_of.size()) != total_cells() ||
      theta.data.size() != atom_of.size()) {
    throw std::logic_error("AtomState: cell bookkeeping broken");
  }
  std::vector<int> counts(atom_value.size(), 0);
  for (std::size_t c = 0; c < atom_of.size(); ++c) {
    const int a = atom_of[c];
    if (a < 0 || a >= static_cast<int>(atom_value.size())) {
      throw std::logic_error("AtomState: atom index out of range");
    }
    if (theta.data[c] != atom_value[a]) {
      throw std::logic_error("AtomState: theta does not mirror atom values");
    }
    ++counts[a];
  }
  for (std::size_t a = 0; a < atom_value.size(); ++a) {
    if (counts[a] != atom_count[a] || atom_count[a] <= 0) {
      throw std::logic_error("AtomState: atom counts broken");
    }
  }
}

void sample_allocation_column(int j, const ColMatrix& R, const ColMatrix& V,
                              AllocationState& alloc, AtomState& atoms,
                              const PdpParams& pdp, int m_aux, bool prior_only,
                              Rng& rng) {
  validate(pdp);
  if (m_aux < 1) {
    throw std::invalid_argument("sample_allocation_column: m_aux must be >= 1");
  }
  const int n = atoms.n;
  const int removed = alloc.remove_column(j);
  if (removed >= 0) atoms.erase_column(removed);
  const int q = alloc.q();

  const double* r = R.col(j);
  const double* v = V.col(j);

  // Existing clusters are scored against their current latent columns; the
  // new-cluster weight integrates the candidate column out against the
  // atom base measure, cell by cell (conjugacy of the normal base with the
  // normal working likelihood). Splits stay feasible this way: a column
  // whose residual profile fits no current cluster gets a fat marginal
  // weight, which randomly drawn candidate columns could never provide.
  std::vector<double> lw(q + 1, 0.0);
  double base_norm = 0.0;   // shared across existing-cluster weights
  double marg_ll = 0.0;     // log ∏_i N(r_i | base_mean, v_i + base_var)
  if (!prior_only) {
    for (int i = 0; i < n; ++i) {
      base_norm -= 0.5 * std::log(2.0 * M_PI * v[i]);
      const double s = v[i] + atoms.base_var;
      const double e = r[i] - atoms.base_mean;
      marg_ll -= 0.5 * std::log(2.0 * M_PI * s) + 0.5 * e * e / s;
    }
  }
  for (int k = 0; k < q; ++k) {
    double ll = base_norm;
    if (!prior_only) {
      const double* th = atoms.theta.col(k);
      for (int i = 0; i < n; ++i) {
        const double e = r[i] - th[i];
        ll -= 0.5 * e * e / v[i];
      }
    }
    lw[k] = std::log(alloc.sizes()[k] - pdp.discount) + ll;
  }
  lw[q] = std::log(pdp.mass + q * pdp.discount) + marg_ll;

  const int pick = sample_log_weights(lw, rng);
  if (pick < q) {
    alloc.assign_column(j, pick);
    return;
  }
  alloc.assign_column(j, q);
  AtomState::UrnColumn fresh;
  if (prior_only) {
    fresh = atoms.draw_urn_column(rng);
  } else {
    // Column for the newly opened cluster: per-cell conjugate posterior
    // draws, appended as private atoms (the next latent-effect sweep pools
    // them back into the shared table).
    fresh.values.resize(n);
    fresh.atom_ref.resize(n);
    fresh.fresh.resize(n);
    const double base_prec = 1.0 / atoms.base_var;
    for (int i = 0; i < n; ++i) {
      const double prec = 1.0 / v[i] + base_prec;
      const double mean = (r[i] / v[i] + atoms.base_mean * base_prec) / prec;
      const double value = mean + rng.normal() / std::sqrt(prec);
      fresh.values[i] = value;
      fresh.fresh[i] = value;
      fresh.atom_ref[i] = -1 - i;
    }
  }
  atoms.append_column(fresh);
}

void sample_theta(const AllocationState& alloc, AtomState& atoms,
                  const ColMatrix& R, const ColMatrix& V, bool prior_only,
                  Rng& rng) {
  const int n = atoms.n;
  const int q = atoms.q();
  if (alloc.q() != q) {
    throw std::logic_error("sample_theta: allocation/atom cluster mismatch");
  }
  // Per-cell Gaussian sufficient statistics pooled over the cluster's
  // columns; these depend only on R and V, which are fixed in this sweep.
  ColMatrix s0(n, q, 0.0), s1(n, q, 0.0);
  if (!prior_only) {
    for (int j = 0; j < alloc.p(); ++j) {
      const int k = alloc.label(j);
      const double* r = R.col(j);
      const double* v = V.col(j);
      double* s0k = s0.col(k);
      double* s1k = s1.col(k);
      for (int i = 0; i < n; ++i) {
        const double w = 1.0 / v[i];
        s0k[i] += w;
        s1k[i] += r[i] * w;
      }
    }
  }

  const double base_prec = 1.0 / atoms.base_var;
  const double base_num = atoms.base_mean * base_prec;

  // Resample each cell's atom membership. Emptied atoms are compacted only
  // after the whole pass.
  std::vector<double> lw;
  for (int k = 0; k < q; ++k) {
    for (int i = 0; i < n; ++i) {
      const int cell = atoms.cell_index(i, k);
      --atoms.atom_count[atoms.atom_of[cell]];
      const double cs0 = s0.at(i, k);
      const double cs1 = s1.at(i, k);
      const std::size_t na = atoms.atom_value.size();
      lw.assign(na + 1, -std::numeric_limits<double>::infinity());
      for (std::size_t a = 0; a < na; ++a) {
        const int cnt = atoms.atom_count[a];
        if (cnt <= 0) continue;
        const double t = atoms.atom_value[a];
        lw[a] = std::log(static_cast<double>(cnt)) -
                0.5 * t * (t * cs0 - 2.0 * cs1);
      }
      const double lam = base_prec + cs0;
      const double num = base_num + cs1;
      lw[na] = std::log(atoms.mass) -
               0.5 * (atoms.base_mean * base_num - num * num / lam) -
               0.5 * std::log(atoms.base_var * lam);
      const int pick = sample_log_weights(lw, rng);
      double value;
      if (pick == static_cast<int>(na)) {
        value = prior_only
                    ? atoms.base_mean + std::sqrt(atoms.base_var) * rng.normal()
                    : num / lam + rng.normal() / std::sqrt(lam);
        atoms.atom_value.push_back(value);
        atoms.atom_count.push_back(1);
        atoms.atom_of[cell] = static_cast<int>(na);
      } else {
        ++atoms.atom_count[pick];
        atoms.atom_of[cell] = pick;
        value = atoms.atom_value[pick];
      }
      atoms.theta.at(i, k) = value;
    }
  }

  // Compact zero-count atoms.
  {
    std::vector<int> remap(atoms.atom_value.size());
    int kept = 0;
    for (std::size_t a = 0; a < atoms.atom_value.size(); ++a) {
      remap[a] = kept;
      if (atoms.atom_count[a] > 0) {
        atoms.atom_value[kept] = atoms.atom_value[a];
        atoms.atom_count[kept] = atoms.atom_count[a];
        ++kept;
      }
    }
    atoms.atom_value.resize(kept);
    atoms.atom_count.resize(kept);
    for (int& a : atoms.atom_of) a = remap[a];
  }

  // Redraw every atom from its conjugate posterior pooled over the cells
  // currently holding it.
  {
    std::vector<double> prec(atoms.atom_value.size(), base_prec);
    std::vector<double> num(atoms.atom_value.size(), base_num);
    if (!prior_only) {
      for (int k = 0; k < q; ++k) {
        for (int i = 0; i < n; ++i) {
          const int a = atoms.atom_of[atoms.cell_index(i, k)];
          prec[a] += s0.at(i, k);
          num[a] += s1.at(i, k);
        }
      }
    }
    for (std::size_t a = 0; a < atoms.atom_value.size(); ++a) {
      atoms.atom_value[a] = num[a] / prec[a] + rng.normal() / std::sqrt(prec[a]);
    }
    for (int k = 0; k < q; ++k) {
      for (int i = 0; i < n; ++i) {
        const int cell = atoms.cell_index(i, k);
        atoms.theta.data[cell] = atoms.atom_value[atoms.atom_of[cell]];
      }
    }
  }

  atoms.recenter();
}

double sample_discount(const AllocationState& alloc, const PdpParams& pdp,
                       Rng& rng, bool* accepted) {
  validate(pdp);
  const double proposal = (rng.uniform() < 0.5) ? 0.0 : rng.uniform();
  const double la = pdp_log_eppf(alloc.sizes(), proposal, pdp.mass) -
                    pdp_log_eppf(alloc.sizes(), pdp.discount, pdp.mass);
  const bool acc = std::log(rng.uniform()) < la;
  if (accepted) *accepted = acc;
  return acc ? proposal : pdp.discount;
}

double sample_dispersion(double phi, std::span<const double> x,
                         std::span<const double> eta, double step, Rng& rng,
                         bool* accepted) {
  if (!(phi > 0.0)) {
    throw std::invalid_argument("sample_dispersion: phi must be > 0");
  }
  if (x.size() != eta.size()) {
    throw std::invalid_argument("sample_dispersion: length mismatch");
  }
  const double proposal = phi * std::exp(step * rng.normal());
  // Exponential(1) prior and the log-scale proposal Jacobian.
  const double la = beta_log_lik(proposal, x, eta) - proposal +
                    std::log(proposal) -
                    (beta_log_lik(phi, x, eta) - phi + std::log(phi));
  const bool acc = std::log(rng.uniform()) < la;
  if (accepted) *accepted = acc;
  return acc ? proposal : phi;
}

double sample_tau(std::span<const double> residuals, Rng& rng) {
  double ss = 0.0;
  for (double e : residuals) ss += e * e;
  const double shape = 2.0 + 0.5 * residuals.size();
  const double rate = 1.0 + 0.5 * ss;
  const double precision = sample_gamma(shape, rate, rng);
  return 1.0 / std::sqrt(precision);
}

}  // namespace mixclust
