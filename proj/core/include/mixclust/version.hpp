#pragma once

namespace mixclust {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixclust
