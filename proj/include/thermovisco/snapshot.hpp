#pragma once

#include <iosfwd>
#include <string>

#include "thermovisco/galerkin.hpp"
#include "thermovisco/solver.hpp"

namespace thermovisco {

inline constexpr int kSnapshotVersion = 1;

/// Plain-text field dump: a header, one line per mesh node
/// (coordinates, displacement, velocity, temperature) and one line per cell
/// (center, stress in xx yy zz yz xz xy order).
void write_snapshot(std::ostream& os, const GalerkinSystem& sys, const SimState& state);
void write_snapshot_file(const std::string& path, const GalerkinSystem& sys, const SimState& state);

}  // namespace thermovisco
