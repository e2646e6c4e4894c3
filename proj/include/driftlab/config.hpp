#pragma once

// Experiment configuration: a strict JSON schema. Unknown keys anywhere are
// rejected by name, and save -> load reproduces the config exactly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/fields.hpp"

namespace driftlab::config {

enum class ExperimentKind {
    simulate,
    stationary,
    wasserstein,
    verify,
    hopfield_demo,
    fpe_solve,
    lemma_report,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

struct FieldConfig {
    std::string drift;
    fields::Params params;
    std::string diffusion;  // empty: derive from an "omega" param or zero diffusion
    fields::Params diffusion_params;
    bool operator==(const FieldConfig&) const = default;
};

struct InitialConfig {
    std::string kind = "point";  // point | gaussian | box | ball
    std::vector<double> center;  // empty: origin
    double var = 1.0;            // gaussian, isotropic
    std::vector<double> lo, hi;  // box
    double radius = 1.0;         // ball
    bool operator==(const InitialConfig&) const = default;
};

struct NumericsConfig {
    double dt = 0.01;
    double T = 10.0;
    int N = 1000;
    std::uint64_t seed = 1;
    int threads = 0;
    double tolerance = 1e-6;
    double checkpoint = 0.5;
    double kernel_var = 0.5;  // KDE smoothing variance for density monitors
    bool operator==(const NumericsConfig&) const = default;
};

struct GridConfig {
    double x_min = -2.5, x_max = 2.5, y_min = -2.5, y_max = 2.5;
    int nx = 64, ny = 64;
    bool operator==(const GridConfig&) const = default;
};

struct W2Config {
    std::string method = "exact";  // exact | entropic | sliced
    double epsilon = 0.0;          // entropic; 0 picks a data-driven default
    int n_projections = 64;        // sliced
    int max_points = 1024;         // exact-assignment subsample cap
    bool operator==(const W2Config&) const = default;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::simulate;
    std::string claim;  // verify only: thm1_decay | prop1_chi_bound | prop2_mass_sink | thm2_concentration
    FieldConfig field;
    std::optional<FieldConfig> field_b;  // wasserstein: second system (default: same field)
    InitialConfig initial;
    std::optional<InitialConfig> initial_b;
    NumericsConfig numerics;
    std::optional<GridConfig> grid;
    W2Config w2;
    std::vector<double> equilibrium;  // verify prop2: ball center (default: found near origin)
    std::string output_dir = "out";
    bool operator==(const ExperimentConfig&) const = default;
};

// Throws std::runtime_error with line/column diagnostics on malformed JSON and
// std::invalid_argument naming the offending key or value on schema errors.
ExperimentConfig load_config_string(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);
std::string save_config(const ExperimentConfig& cfg);

}  // namespace driftlab::config
