#pragma once

namespace loadwin {

inline constexpr const char* kToolName = "loadwin";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace loadwin
