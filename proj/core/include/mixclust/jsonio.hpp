#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace mixclust {

// JSON has no literal for non-finite numbers, so +-inf and NaN travel as
// the strings "Inf", "-Inf" and "NaN".
inline nlohmann::json encode_real(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "NaN";
  return x > 0 ? "Inf" : "-Inf";
}

inline double decode_real(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-Inf") return -std::numeric_limits<double>::infinity();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("decode_real: expected a number or Inf/-Inf/NaN");
}

}  // namespace mixclust
