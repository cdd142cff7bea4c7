#pragma once

namespace conclab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "conc-lab";
inline constexpr int kSchemaVersion = 1;

}  // namespace conclab
