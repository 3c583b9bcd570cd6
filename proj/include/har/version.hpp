#pragma once

namespace har {

inline constexpr const char* kToolName = "harbench";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace har
