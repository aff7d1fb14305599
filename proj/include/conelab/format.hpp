#pragma once

#include <string>

namespace conelab {

/// Shortest round-trip decimal representation of a double ("%.17g" class),
/// so text exports are byte-stable and reparse to the same value.
std::string fmt_real(double x);

/// Writes `contents` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace conelab
