#pragma once

namespace finfty {

inline constexpr const char* kVersion = "0.1.0";
// Bumped whenever a serialized schema changes shape.
inline constexpr const char* kArtifactSchema = "finfty.v1";

}  // namespace finfty
