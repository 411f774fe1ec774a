#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mixclust/partition.hpp"
#include "oracles.hpp"

using mixclust::AllocationState;
using mixclust::AtomState;
using mixclust::pdp_log_eppf;
using mixclust::pdp_predictive_weights;
using mixclust::PdpParams;
using mixclust::Rng;

namespace {

std::vector<int> sizes_of(const std::vector<int>& labels) {
  const int q = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<int> sizes(q, 0);
  for (int c : labels) ++sizes[c];
  return sizes;
}

}  // namespace

TEST_CASE("predictive weights match direct arithmetic") {
  const std::vector<double> w = pdp_predictive_weights({2, 3}, 0.3, 20.0);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(0.068).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.108).epsilon(1e-12));
  CHECK(w[2] == doctest::Approx(0.824).epsilon(1e-12));

  const std::vector<double> v = pdp_predictive_weights({1}, 0.5, 1.0);
  CHECK(v[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("zero discount reduces the weights to the plain urn") {
  const std::vector<int> sizes = {3, 4, 1};
  const double mass = 2.0;
  const std::vector<double> w = pdp_predictive_weights(sizes, 0.0, mass);
  const double total = 3 + 4 + 1 + mass;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    CHECK(w[k] == doctest::Approx(sizes[k] / total).epsilon(1e-12));
  }
  CHECK(w.back() == doctest::Approx(mass / total).epsilon(1e-12));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight and partition-probability inputs are validated") {
  CHECK_THROWS_AS(pdp_predictive_weights({2, 0}, 0.3, 20.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pdp_predictive_weights({2}, -0.1, 20.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pdp_predictive_weights({2}, 1.0, 20.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pdp_predictive_weights({2}, 0.3, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pdp_log_eppf({2, 0}, 0.3, 20.0), std::invalid_argument);
}

TEST_CASE("partition log probability matches hand arithmetic") {
  CHECK(pdp_log_eppf({2}, 0.0, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(pdp_log_eppf({1, 1}, 0.3, 20.0) ==
        doctest::Approx(std::log(20.3 / 21.0)).epsilon(1e-12));
  // A single column has probability one.
  CHECK(pdp_log_eppf({1}, 0.3, 20.0) == doctest::Approx(0.0));
  CHECK(pdp_log_eppf({1}, 0.0, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("partition log probability is size-order invariant") {
  const std::vector<int> sizes = {4, 1, 3, 2, 2};
  std::vector<int> perm = sizes;
  const double want = pdp_log_eppf(sizes, 0.35, 7.0);
  std::sort(perm.begin(), perm.end());
  do {
    CHECK(pdp_log_eppf(perm, 0.35, 7.0) == doctest::Approx(want).epsilon(1e-13));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("closed form equals the sequential allocation product") {
  for (const auto& [d, mass] :
       std::vector<std::pair<double, double>>{
           {0.0, 1.0}, {0.3, 20.0}, {0.7, 0.5}, {0.05, 11.0}}) {
    for (int p = 1; p <= 6; ++p) {
      for (const std::vector<int>& labels : oracles::set_partitions(p)) {
        const double closed = pdp_log_eppf(sizes_of(labels), d, mass);
        const double seq = oracles::log_eppf_sequential(labels, d, mass);
        CHECK(closed == doctest::Approx(seq).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("partition probabilities sum to one") {
  for (const auto& [d, mass] :
       std::vector<std::pair<double, double>>{{0.0, 2.0}, {0.4, 9.0}}) {
    double total = 0.0;
    for (const std::vector<int>& labels : oracles::set_partitions(6)) {
      total += std::exp(pdp_log_eppf(sizes_of(labels), d, mass));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("allocation state construction") {
  const AllocationState s = AllocationState::singletons(4);
  CHECK(s.p() == 4);
  CHECK(s.q() == 4);
  for (int j = 0; j < 4; ++j) CHECK(s.label(j) == j);
  CHECK(s.sizes() == std::vector<int>(4, 1));
  s.check_invariants();

  const AllocationState t = AllocationState::from_labels({0, 1, 0, 2, 1});
  CHECK(t.q() == 3);
  CHECK(t.sizes() == std::vector<int>{2, 2, 1});
  t.check_invariants();

  CHECK_THROWS_AS(AllocationState::from_labels({}), std::invalid_argument);
  CHECK_THROWS_AS(AllocationState::from_labels({0, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(AllocationState::from_labels({-1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(AllocationState::singletons(0), std::invalid_argument);
}

TEST_CASE("removing and assigning columns keeps labels compact") {
  AllocationState s = AllocationState::from_labels({0, 1, 0, 2});

  // Column 1 is a singleton: removal deletes cluster 1 and shifts cluster 2.
  CHECK(s.remove_column(1) == 1);
  CHECK(s.q() == 2);
  CHECK(s.label(0) == 0);
  CHECK(s.label(1) == -1);
  CHECK(s.label(3) == 1);

  // Reattach as a brand-new cluster.
  s.assign_column(1, 2);
  s.check_invariants();
  CHECK(s.q() == 3);
  CHECK(s.label(1) == 2);

  // Removing from a two-column cluster keeps the cluster alive.
  CHECK(s.remove_column(0) == -1);
  CHECK(s.q() == 3);
  s.assign_column(0, 0);
  s.check_invariants();

  CHECK_THROWS_AS(
      [&] {
        s.remove_column(0);
        s.remove_column(0);
      }(),
      std::logic_error);
  s.assign_column(0, 0);
  CHECK_THROWS_AS(s.assign_column(0, 0), std::logic_error);
  s.remove_column(0);
  CHECK_THROWS_AS(s.assign_column(0, 7), std::logic_error);
  s.assign_column(0, 0);
}

TEST_CASE("atom columns share values exactly and compact on erase") {
  Rng rng(41);
  AtomState atoms(5, 11.0, -0.18, 2.2);
  for (int k = 0; k < 4; ++k) {
    atoms.append_column(atoms.draw_urn_column(rng));
    atoms.check_invariants();
  }
  CHECK(atoms.q() == 4);
  CHECK(std::accumulate(atoms.atom_count.begin(), atoms.atom_count.end(), 0) ==
        atoms.total_cells());

  const std::vector<double> values_before = atoms.atom_value;
  atoms.erase_column(1);
  atoms.check_invariants();
  CHECK(atoms.q() == 3);
  // Every surviving atom value existed before the erase.
  for (double v : atoms.atom_value) {
    CHECK(std::count(values_before.begin(), values_before.end(), v) >= 1);
  }
  CHECK_THROWS_AS(atoms.erase_column(3), std::logic_error);
  CHECK_THROWS_AS(atoms.erase_column(-1), std::logic_error);
}

TEST_CASE("recentering zeroes the cell mean and keeps sharing intact") {
  Rng rng(42);
  AtomState atoms(6, 2.0, 3.0, 1.5);
  for (int k = 0; k < 3; ++k) {
    atoms.append_column(atoms.draw_urn_column(rng));
  }
  atoms.recenter();
  atoms.check_invariants();
  double mean = 0.0;
  for (double t : atoms.theta.data) mean += t;
  mean /= atoms.total_cells();
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("an urn column from a tiny-mass empty state is constant") {
  Rng rng(43);
  for (int rep = 0; rep < 50; ++rep) {
    AtomState atoms(8, 1e-12, 0.0, 1.0);
    const AtomState::UrnColumn uc = atoms.draw_urn_column(rng);
    CHECK(uc.fresh.size() == 1);
    for (double v : uc.values) CHECK(v == uc.fresh[0]);
  }
}

TEST_CASE("urn draws reinforce existing atoms at the book rate") {
  // One shared atom over two cells. The first row of a fresh column picks it
  // with probability 2/(2+mass) and, given that, the second row with
  // probability 3/(3+mass).
  Rng seed_rng(44);
  AtomState atoms(2, 1e-12, 0.0, 1.0);
  atoms.append_column(atoms.draw_urn_column(seed_rng));
  REQUIRE(atoms.atom_value.size() == 1);
  atoms.mass = 2.0;

  Rng rng(45);
  const int reps = 40000;
  int first = 0, both = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const AtomState::UrnColumn uc = atoms.draw_urn_column(rng);
    const bool f = uc.atom_ref[0] == 0;
    first += f;
    both += f && uc.atom_ref[1] == 0;
  }
  CHECK(double(first) / reps == doctest::Approx(0.5).epsilon(0.03));
  CHECK(double(both) / reps == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("urn column fresh draws follow the base distribution") {
  Rng rng(46);
  AtomState atoms(1, 5.0, -0.18, 2.2);
  const int reps = 50000;
  double sum = 0.0, ss = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const AtomState::UrnColumn uc = atoms.draw_urn_column(rng);
    REQUIRE(uc.fresh.size() == 1);
    sum += uc.fresh[0];
    ss += uc.fresh[0] * uc.fresh[0];
  }
  const double mean = sum / reps;
  const double var = ss / reps - mean * mean;
  CHECK(mean == doctest::Approx(-0.18).epsilon(0.15));
  CHECK(var == doctest::Approx(2.2).epsilon(0.05));
}

TEST_CASE("distinct values in an urn column follow the urn growth rate") {
  // From an empty state the column is itself a Polya urn sequence, so the
  // expected number of fresh atoms is sum_{i=0}^{n-1} mass/(mass+i).
  const int n = 50;
  const double mass = 5.0;
  double want = 0.0;
  for (int i = 0; i < n; ++i) want += mass / (mass + i);
  Rng rng(47);
  const int reps = 4000;
  double total = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    AtomState atoms(n, mass, 0.0, 1.0);
    total += atoms.draw_urn_column(rng).fresh.size();
  }
  CHECK(total / reps == doctest::Approx(want).epsilon(0.03));
}
