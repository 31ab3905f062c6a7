#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "avalanche/lattice/grid.hpp"

namespace avalanche::lattice {

// Snapshot format: plain P2 graymap, maxval 2, one value per cell
// (0 Depleted, 1 Susceptible, 2 Infected), row-major, one grid row per line.
// The sidecar holds a single line "m <side> iteration <n> seed <seed>".

void write_pgm(std::ostream& out, const Grid& grid);
std::string sidecar_line(const Grid& grid);

/// Parses a P2 body; seed and iteration come from the sidecar line.
/// Throws std::runtime_error on malformed input.
Grid read_pgm(std::istream& in, const std::string& sidecar);

/// Writes `path` and `path` + ".meta".
void save_snapshot(const std::filesystem::path& path, const Grid& grid);
Grid load_snapshot(const std::filesystem::path& path);

}  // namespace avalanche::lattice
