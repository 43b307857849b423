#pragma once

namespace cpd {

inline constexpr const char* kToolName = "cpdetect";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cpd
