#pragma once

// Plain-text artifact writers. All doubles are printed with %.17g so that a
// write/read cycle reproduces the original values bit for bit.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/harness.hpp"
#include "driftlab/measures.hpp"
#include "driftlab/sde.hpp"

namespace driftlab::csv {

std::string format_double(double v);

// Header "t,x1,..,xd", one row per stored time point.
void write_trajectory(const std::filesystem::path& path, const sde::Trajectory& traj);

// Header "id,x1,..,xd", one row per particle.
void write_ensemble(const std::filesystem::path& path, const sde::ParticleEnsemble& ensemble);

void write_series(const std::filesystem::path& path, const harness::Series& series);
harness::Series read_series(const std::filesystem::path& path);

// Line 1: "x_min,x_max,y_min,y_max,nx,ny"; line 2: those values; then nx rows
// of ny cell values each (row i sweeps the y index at fixed x index i).
void write_grid(const std::filesystem::path& path, const measures::GridDensity& density);
measures::GridDensity read_grid(const std::filesystem::path& path);

// "key = value" lines, in the given order.
void write_meta(const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace driftlab::csv
