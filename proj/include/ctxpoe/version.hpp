#pragma once

namespace ctxpoe {

inline constexpr const char* kToolName = "ctxpoe";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace ctxpoe
