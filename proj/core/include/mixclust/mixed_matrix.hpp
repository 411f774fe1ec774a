#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mixclust {

// Column kinds, with the integer codes used throughout serialization.
enum class ColumnKind : int {
  Binary = 1,
  Ordinal = 2,
  Proportion = 3,
  Continuous = 4,
  Count = 5,
};

struct ColumnType {
  ColumnKind kind = ColumnKind::Continuous;
  int levels = 0;  // category count L >= 2 for ordinal columns, else 0

  bool operator==(const ColumnType&) const = default;

  // Serialized tag: "binary", "ordinal:<L>", "count", "proportion",
  // "continuous". parse throws std::invalid_argument on anything else.
  std::string tag() const;
  static ColumnType parse_tag(const std::string& tag);
};

// Proportion entries are pulled into [kProportionClamp, 1-kProportionClamp]
// on ingestion so logits stay finite.
inline constexpr double kProportionClamp = 1e-6;

struct LoadReport {
  std::size_t clamped = 0;  // proportion entries moved onto the clamp bounds
};

// Column-typed data matrix (n rows, p columns, column-major storage).
// Construction validates every entry against its column type and throws
// std::invalid_argument naming the offending row and column.
class MixedMatrix {
 public:
  MixedMatrix() = default;

  static MixedMatrix from_columns(std::vector<std::string> names,
                                  std::vector<ColumnType> types,
                                  std::vector<std::vector<double>> columns,
                                  LoadReport* report = nullptr);

  // CSV layout: one header row of column names, one row of type tags, then
  // n data rows. Values must be plain numbers (no quoting).
  static MixedMatrix load_csv(const std::string& path,
                              LoadReport* report = nullptr);
  void save_csv(const std::string& path) const;

  std::size_t n() const { return n_; }
  std::size_t p() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ColumnType>& types() const { return types_; }
  const std::vector<double>& column(std::size_t j) const { return cols_[j]; }
  double at(std::size_t i, std::size_t j) const { return cols_[j][i]; }

  // FNV-1a hash over the dimensions, names, type tags and raw data bytes;
  // stable across save/load round trips.
  std::string fingerprint() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::string> names_;
  std::vector<ColumnType> types_;
  std::vector<std::vector<double>> cols_;
};

// Fixed per-column intercepts (data-driven, computed once before sampling):
//   binary       mean of Phi^-1((x + eps0) / (1 + 2*eps0))
//   ordinal(L)   mean of Phi^-1((x + eps0) / (L + 2*eps0))
//   count        log(mean(x) + eps0)
//   continuous   mean(x)
//   proportion   mean of logit(x)
std::vector<double> compute_intercepts(const MixedMatrix& m,
                                       double eps0 = 0.01);

}  // namespace mixclust
