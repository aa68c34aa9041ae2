#pragma once

namespace diffphy {

inline constexpr const char* kToolVersion = "0.1.0";

/// Checkpoint container format version. Bump on any layout change.
inline constexpr unsigned kCheckpointVersion = 1;

}  // namespace diffphy
