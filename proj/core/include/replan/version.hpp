#pragma once

namespace replan {

inline constexpr const char* kToolName = "replan";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace replan
