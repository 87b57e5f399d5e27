#pragma once

namespace annomap {

inline constexpr const char* kToolName = "annomap";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace annomap
