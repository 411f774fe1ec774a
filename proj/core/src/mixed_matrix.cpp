#include "mixclust/mixed_matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mixclust/special.hpp"

namespace mixclust {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool is_integral(double x) { return std::isfinite(x) && x == std::floor(x); }

std::string cell_ref(std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << "row " << row << ", column " << col;
  return os.str();
}

std::string format_value(double x, const ColumnType& t) {
  char buf[32];
  if (t.kind == ColumnKind::Binary || t.kind == ColumnKind::Ordinal ||
      t.kind == ColumnKind::Count) {
    auto r = std::to_chars(buf, buf + sizeof(buf),
                           static_cast<long long>(std::llround(x)));
    return std::string(buf, r.ptr);
  }
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const unsigned char* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::string ColumnType::tag() const {
  switch (kind) {
    case ColumnKind::Binary:
      return "binary";
    case ColumnKind::Ordinal:
      return "ordinal:" + std::to_string(levels);
    case ColumnKind::Proportion:
      return "proportion";
    case ColumnKind::Continuous:
      return "continuous";
    case ColumnKind::Count:
      return "count";
  }
  throw std::logic_error("ColumnType::tag: bad kind");
}

ColumnType ColumnType::parse_tag(const std::string& tag) {
  if (tag == "binary") return {ColumnKind::Binary, 0};
  if (tag == "count") return {ColumnKind::Count, 0};
  if (tag == "proportion") return {ColumnKind::Proportion, 0};
  if (tag == "continuous") return {ColumnKind::Continuous, 0};
  if (tag.rfind("ordinal:", 0) == 0) {
    int levels = 0;
    const std::string num = tag.substr(8);
    auto r = std::from_chars(num.data(), num.data() + num.size(), levels);
    if (r.ec == std::errc() && r.ptr == num.data() + num.size() &&
        levels >= 2) {
      return {ColumnKind::Ordinal, levels};
    }
    throw std::invalid_argument("ordinal tag needs a level count >= 2: '" +
                                tag + "'");
  }
  throw std::invalid_argument("unknown type tag '" + tag + "'");
}

MixedMatrix MixedMatrix::from_columns(std::vector<std::string> names,
                                      std::vector<ColumnType> types,
                                      std::vector<std::vector<double>> columns,
                                      LoadReport* report) {
  if (names.size() != types.size() || names.size() != columns.size()) {
    throw std::invalid_argument(
        "MixedMatrix: names, types and columns must have equal length");
  }
  if (columns.empty()) {
    throw std::invalid_argument("MixedMatrix: needs at least one column");
  }
  const std::size_t n = columns[0].size();
  if (n == 0) {
    throw std::invalid_argument("MixedMatrix: needs at least one row");
  }
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) {
      throw std::invalid_argument("column " + std::to_string(j + 1) +
                                  ": length mismatch");
    }
    const ColumnType& t = types[j];
    for (std::size_t i = 0; i < n; ++i) {
      double& x = columns[j][i];
      if (!std::isfinite(x)) {
        throw std::invalid_argument(cell_ref(i + 1, j + 1) +
                                    ": non-finite value");
      }
      switch (t.kind) {
        case ColumnKind::Binary:
          if (!(x == 0.0 || x == 1.0)) {
            throw std::invalid_argument(cell_ref(i + 1, j + 1) +
                                        ": binary value must be 0 or 1");
          }
          break;
        case ColumnKind::Ordinal:
          if (!is_integral(x) || x < 1.0 || x > t.levels) {
            throw std::invalid_argument(
                cell_ref(i + 1, j + 1) + ": ordinal value must be in 1.." +
                std::to_string(t.levels));
          }
          break;
        case ColumnKind::Count:
          if (!is_integral(x) || x < 0.0) {
            throw std::invalid_argument(
                cell_ref(i + 1, j + 1) +
                ": count value must be a non-negative integer");
          }
          break;
        case ColumnKind::Proportion:
          if (!(x >= 0.0 && x <= 1.0)) {
            throw std::invalid_argument(cell_ref(i + 1, j + 1) +
                                        ": proportion value must be in [0,1]");
          }
          if (x < kProportionClamp) {
            x = kProportionClamp;
            ++rep.clamped;
          } else if (x > 1.0 - kProportionClamp) {
            x = 1.0 - kProportionClamp;
            ++rep.clamped;
          }
          break;
        case ColumnKind::Continuous:
          break;
      }
    }
  }
  MixedMatrix m;
  m.n_ = n;
  m.names_ = std::move(names);
  m.types_ = std::move(types);
  m.cols_ = std::move(columns);
  return m;
}

MixedMatrix MixedMatrix::load_csv(const std::string& path,
                                  LoadReport* report) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument(path + ": missing header row");
  }
  std::vector<std::string> names = split_csv_line(line);
  if (!std::getline(in, line)) {
    throw std::invalid_argument(path + ": missing type tag row");
  }
  std::vector<std::string> tags = split_csv_line(line);
  if (tags.size() != names.size()) {
    throw std::invalid_argument(
        path + ": type tag row has " + std::to_string(tags.size()) +
        " fields, expected " + std::to_string(names.size()));
  }
  std::vector<ColumnType> types(names.size());
  for (std::size_t j = 0; j < tags.size(); ++j) {
    try {
      types[j] = ColumnType::parse_tag(tags[j]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": column " + std::to_string(j + 1) +
                                  ": " + e.what());
    }
  }
  std::vector<std::vector<double>> cols(names.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != names.size()) {
      throw std::invalid_argument(
          path + ": row " + std::to_string(row) + ": expected " +
          std::to_string(names.size()) + " fields, found " +
          std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double x = 0.0;
      auto r = std::from_chars(fields[j].data(),
                               fields[j].data() + fields[j].size(), x);
      if (r.ec != std::errc() ||
          r.ptr != fields[j].data() + fields[j].size()) {
        throw std::invalid_argument(path + ": " + cell_ref(row, j + 1) +
                                    ": cannot parse '" + fields[j] +
                                    "' as a number");
      }
      cols[j].push_back(x);
    }
  }
  if (row == 0) {
    throw std::invalid_argument(path + ": no data rows");
  }
  try {
    return from_columns(std::move(names), std::move(types), std::move(cols),
                        report);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void MixedMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (std::size_t j = 0; j < p(); ++j) {
    out << (j ? "," : "") << names_[j];
  }
  out << "\n";
  for (std::size_t j = 0; j < p(); ++j) {
    out << (j ? "," : "") << types_[j].tag();
  }
  out << "\n";
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < p(); ++j) {
      out << (j ? "," : "") << format_value(cols_[j][i], types_[j]);
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

std::string MixedMatrix::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t n64 = n_;
  const std::uint64_t p64 = p();
  fnv_bytes(h, &n64, sizeof(n64));
  fnv_bytes(h, &p64, sizeof(p64));
  for (std::size_t j = 0; j < p(); ++j) {
    fnv_bytes(h, names_[j].data(), names_[j].size());
    const std::string tag = types_[j].tag();
    fnv_bytes(h, tag.data(), tag.size());
    fnv_bytes(h, cols_[j].data(), cols_[j].size() * sizeof(double));
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) {
    buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
  }
  buf[16] = '\0';
  return std::string(buf);
}

std::vector<double> compute_intercepts(const MixedMatrix& m, double eps0) {
  std::vector<double> alpha(m.p(), 0.0);
  for (std::size_t j = 0; j < m.p(); ++j) {
    const std::vector<double>& col = m.column(j);
    const ColumnType& t = m.types()[j];
    double acc = 0.0;
    switch (t.kind) {
      case ColumnKind::Binary:
        for (double x : col) {
          acc += std_normal_quantile((x + eps0) / (1.0 + 2.0 * eps0));
        }
        alpha[j] = acc / col.size();
        break;
      case ColumnKind::Ordinal:
        for (double x : col) {
          acc += std_normal_quantile((x + eps0) / (t.levels + 2.0 * eps0));
        }
        alpha[j] = acc / col.size();
        break;
      case ColumnKind::Count:
        for (double x : col) acc += x;
        alpha[j] = std::log(acc / col.size() + eps0);
        break;
      case ColumnKind::Continuous:
        for (double x : col) acc += x;
        alpha[j] = acc / col.size();
        break;
      case ColumnKind::Proportion:
        for (double x : col) acc += std::log(x / (1.0 - x));
        alpha[j] = acc / col.size();
        break;
    }
  }
  return alpha;
}

}  // namespace mixclust
