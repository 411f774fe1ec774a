#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mixclust/mixed_matrix.hpp"
#include "mixclust/rng.hpp"

using mixclust::ColumnKind;
using mixclust::ColumnType;
using mixclust::compute_intercepts;
using mixclust::LoadReport;
using mixclust::MixedMatrix;

namespace {

std::string tmp_path(const std::string& name) {
  return std::string("mm_") + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

MixedMatrix small_matrix() {
  return MixedMatrix::from_columns(
      {"b", "o", "k", "pr", "x"},
      {{ColumnKind::Binary, 0},
       {ColumnKind::Ordinal, 5},
       {ColumnKind::Count, 0},
       {ColumnKind::Proportion, 0},
       {ColumnKind::Continuous, 0}},
      {{0, 1, 1, 0},
       {1, 3, 5, 2},
       {0, 2, 7, 1},
       {0.25, 0.5, 0.75, 0.9},
       {1.5, -2.25, 0.125, 4.75}});
}

}  // namespace

TEST_CASE("column tags round trip") {
  for (ColumnType t : {ColumnType{ColumnKind::Binary, 0},
                       ColumnType{ColumnKind::Ordinal, 5},
                       ColumnType{ColumnKind::Ordinal, 2},
                       ColumnType{ColumnKind::Count, 0},
                       ColumnType{ColumnKind::Proportion, 0},
                       ColumnType{ColumnKind::Continuous, 0}}) {
    CHECK(ColumnType::parse_tag(t.tag()) == t);
  }
  CHECK_THROWS_AS(ColumnType::parse_tag("gaussian"), std::invalid_argument);
  CHECK_THROWS_AS(ColumnType::parse_tag("ordinal:1"), std::invalid_argument);
  CHECK_THROWS_AS(ColumnType::parse_tag("ordinal:x"), std::invalid_argument);
}

TEST_CASE("validation points at the offending cell") {
  try {
    MixedMatrix::from_columns({"a"}, {{ColumnKind::Binary, 0}},
                              {{0, 1, 0, 2, 1}});
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 4, column 1") != std::string::npos);
  }
  CHECK_THROWS_AS(MixedMatrix::from_columns({"a"}, {{ColumnKind::Ordinal, 3}},
                                            {{1, 4}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MixedMatrix::from_columns({"a"}, {{ColumnKind::Count, 0}},
                                            {{1, -2}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MixedMatrix::from_columns({"a"}, {{ColumnKind::Count, 0}},
                                            {{1, 2.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MixedMatrix::from_columns({"a"},
                                            {{ColumnKind::Proportion, 0}},
                                            {{0.5, 1.2}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      MixedMatrix::from_columns({"a"}, {{ColumnKind::Continuous, 0}},
                                {{1.0, std::nan("")}}),
      std::invalid_argument);
}

TEST_CASE("proportion entries are clamped with a report") {
  LoadReport rep;
  MixedMatrix m = MixedMatrix::from_columns(
      {"p"}, {{ColumnKind::Proportion, 0}}, {{0.0, 0.5, 1.0}}, &rep);
  CHECK(rep.clamped == 2);
  CHECK(m.at(0, 0) == 1e-6);
  CHECK(m.at(1, 0) == 0.5);
  CHECK(m.at(2, 0) == 1.0 - 1e-6);
}

TEST_CASE("csv round trip is bit exact") {
  mixclust::Rng rng(5);
  std::vector<double> cont(16), prop(16);
  for (auto& x : cont) x = rng.normal() * 13.7;
  for (auto& x : prop) x = rng.uniform();
  MixedMatrix m = MixedMatrix::from_columns(
      {"c1", "p1"},
      {{ColumnKind::Continuous, 0}, {ColumnKind::Proportion, 0}},
      {cont, prop});
  const std::string path = tmp_path("roundtrip.csv");
  m.save_csv(path);
  LoadReport rep;
  MixedMatrix back = MixedMatrix::load_csv(path, &rep);
  CHECK(rep.clamped == 0);
  CHECK(back.n() == m.n());
  CHECK(back.names() == m.names());
  CHECK(back.types() == m.types());
  for (std::size_t j = 0; j < m.p(); ++j) {
    for (std::size_t i = 0; i < m.n(); ++i) {
      CHECK(back.at(i, j) == m.at(i, j));
    }
  }
  CHECK(back.fingerprint() == m.fingerprint());
  std::remove(path.c_str());
}

TEST_CASE("fingerprint reacts to any change") {
  MixedMatrix a = small_matrix();
  const std::string base = a.fingerprint();

  MixedMatrix b = MixedMatrix::from_columns(
      {"b", "o", "k", "pr", "zz"}, a.types(),
      {a.column(0), a.column(1), a.column(2), a.column(3), a.column(4)});
  CHECK(b.fingerprint() != base);

  auto cols = std::vector<std::vector<double>>{
      a.column(0), a.column(1), a.column(2), a.column(3), a.column(4)};
  cols[4][2] += 1e-9;
  MixedMatrix c = MixedMatrix::from_columns(a.names(), a.types(), cols);
  CHECK(c.fingerprint() != base);
}

TEST_CASE("csv loader reports malformed input precisely") {
  const std::string path = tmp_path("bad.csv");

  write_file(path, "a,b\nbinary,continuous\n0,1.5\n1\n");
  try {
    MixedMatrix::load_csv(path);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("found 1") != std::string::npos);
  }

  write_file(path, "a\nbinary\nx\n");
  CHECK_THROWS_WITH_AS(MixedMatrix::load_csv(path),
                       doctest::Contains("cannot parse"),
                       std::invalid_argument);

  write_file(path, "a\nwobble\n0\n");
  CHECK_THROWS_WITH_AS(MixedMatrix::load_csv(path),
                       doctest::Contains("unknown type tag"),
                       std::invalid_argument);

  write_file(path, "a\n");
  CHECK_THROWS_AS(MixedMatrix::load_csv(path), std::invalid_argument);

  CHECK_THROWS_WITH_AS(MixedMatrix::load_csv("does_not_exist.csv"),
                       doctest::Contains("does_not_exist.csv"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("intercepts follow the per-type recipes") {
  // Symmetric binary column: quantile args mirror around 1/2.
  MixedMatrix mb = MixedMatrix::from_columns({"b"}, {{ColumnKind::Binary, 0}},
                                             {{0, 1}});
  CHECK(compute_intercepts(mb)[0] == doctest::Approx(0.0).epsilon(1e-12));

  MixedMatrix mk = MixedMatrix::from_columns({"k"}, {{ColumnKind::Count, 0}},
                                             {{0, 2, 4}});
  CHECK(compute_intercepts(mk)[0] ==
        doctest::Approx(std::log(2.01)).epsilon(1e-12));

  MixedMatrix mo = MixedMatrix::from_columns({"o"}, {{ColumnKind::Ordinal, 5}},
                                             {{2, 4}});
  CHECK(compute_intercepts(mo)[0] ==
        doctest::Approx(0.29252181997564).epsilon(1e-9));

  MixedMatrix mc = MixedMatrix::from_columns(
      {"c"}, {{ColumnKind::Continuous, 0}}, {{1.0, 2.0, 6.0}});
  CHECK(compute_intercepts(mc)[0] == doctest::Approx(3.0).epsilon(1e-12));

  MixedMatrix mp = MixedMatrix::from_columns(
      {"p"}, {{ColumnKind::Proportion, 0}}, {{0.25, 0.75}});
  CHECK(compute_intercepts(mp)[0] == doctest::Approx(0.0).epsilon(1e-12));
}
