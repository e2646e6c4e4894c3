#pragma once

// Executes one configured experiment and writes its artifacts into the
// output directory (report.txt, series_*.csv, grid_*.csv, meta.txt).
// Nothing is written outside that directory. The DRIFTLAB_OUTPUT_DIR
// environment variable, when set, overrides the configured output directory
// and nothing else.
//
// Exit codes: 0 pass/success, 1 fail, 2 inconclusive, 3 error.
//
// Experiments:
//   simulate      one sample path (series_path.csv) plus the terminal particle
//                 cloud (series_ensemble.csv) of the configured system.
//   stationary    evolves N particles, smooths them onto the grid with a
//                 Gaussian kernel (numerics.kernel_var), and monitors the
//                 area-weighted l2 change each numerics.checkpoint time units
//                 until numerics.tolerance or time T. Exit 0 if the monitor
//                 converged, 1 otherwise.
//   wasserstein   evolves the systems `field` and `field_b` (default: same
//                 field, independent noise) to time T and reports the chosen
//                 coupling distance between the terminal clouds.
//   verify        runs the named claim's verification protocol. Config maps:
//                 dt, T, N, seed, threads, grid; claim-specific tolerances
//                 stay at their protocol defaults (numerics.tolerance feeds
//                 only the grid-solver stationarity target where one is
//                 used). prop2_mass_sink reads `equilibrium` as a hint for
//                 which stable root to certify; thm2_concentration requires
//                 a hopfield drift and a constant isotropic diffusion.
//   hopfield-demo pinned pipeline: beta = 2, u = (0.2, 0.25), trig diagonal
//                 diffusion amplitude 0.4, N = 2000, dt = 0.01, kernel
//                 variance 2*I, monitor threshold 1e-6. Config supplies only
//                 seed, threads, T cap, grid, and the output directory.
//   fpe-solve     grid solver run to stationarity (numerics.tolerance) from
//                 the configured initial density; emits the final grid and
//                 the residual series. Exit 0 if converged within T.
//   lemma-report  evaluates both sides of the divergence-identity report on
//                 the circle centered at `equilibrium` (default origin) with
//                 radius initial.radius; informational, always exit 0.

#include <filesystem>

#include "driftlab/config.hpp"

namespace driftlab::runner {

// Runs a validated config. Throws only on programmer error; experiment
// failures are encoded in the exit status.
int run(const config::ExperimentConfig& cfg);

// Loads, validates, and runs a config file; maps any error to status 3 with
// a diagnostic on stderr.
int run_config_file(const std::filesystem::path& path);

}  // namespace driftlab::runner
