#pragma once

namespace entlink {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "entlink";

}  // namespace entlink
