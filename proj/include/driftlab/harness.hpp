#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/contraction.hpp"
#include "driftlab/fpe.hpp"
#include "driftlab/hopfield.hpp"
#include "driftlab/measures.hpp"
#include "driftlab/sde.hpp"

// End-to-end numerical verification of the four decay/concentration claims.
// Each verifier measures its own constants, runs the experiment on the
// particle and/or grid path, and issues pass/fail only when the claim's
// hypotheses hold (inconclusive otherwise, naming the unmet hypothesis).
namespace driftlab::harness {

using fields::DiffusionField;
using fields::DriftField;
using fields::Vec;

enum class ClaimId { thm1_decay, prop1_chi_bound, prop2_mass_sink, thm2_concentration };
enum class Verdict { pass, fail, inconclusive };

std::string to_string(ClaimId id);
std::string to_string(Verdict v);

// Named multi-column time series for CSV export (first column is t or step).
struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct VerificationReport {
    ClaimId claim_id = ClaimId::thm1_decay;
    Verdict verdict = Verdict::inconclusive;
    std::map<std::string, double> measured;
    std::map<std::string, double> bound;
    std::map<std::string, std::string> provenance;  // seeds, sizes, runtimes
    std::string note;
    std::vector<Series> series;

    std::string to_text() const;
};

struct Thm1Options {
    double T = 10.0;
    double dt = 0.01;
    int n_pairs = 200;
    std::uint64_t seed = 1;
    std::optional<contraction::Box> region;  // constant-estimation box; default [-4,4]^d
    int rate_pairs = 2000;
    int n_checkpoints = 40;
    double plateau_factor = 3.0;  // fit window ends when w2 < factor * plateau
    int min_fit_points = 5;
    double margin_fraction = 0.1;  // margin = fraction * rate + 3 * SE(slope)
    int n_threads = 0;
};

// Couples two ensembles through one noise realization and fits the decay of
// log W2^2 over the pre-plateau window. Inconclusive when the measured
// constants do not satisfy c > L_G/2 or the window is too short.
VerificationReport verify_thm1(const DriftField& f, const DiffusionField& G,
                               const sde::InitialMeasure& mu0, const sde::InitialMeasure& nu0,
                               const Thm1Options& opts);

struct Prop1Options {
    double T = 16.0;
    double dt = 0.01;
    int N = 4000;
    std::uint64_t seed = 2;
    std::optional<contraction::Box> region;
    std::optional<measures::GridSpec> monitor_grid;  // default [-2.5,2.5]^2, 64^2
    double monitor_kernel_var = 0.5;
    double stationarity_tol = 0.05;
    double checkpoint_time = 1.0;
    int n_bootstrap = 10;
    double chi2_inflation = 1.1;
    int n_threads = 0;
};

// Runs the G- and Q-driven systems to stationarity and checks
// W2^2(terminal, terminal) against the sampled sup of |G - Q|_F^2.
VerificationReport verify_prop1(const DriftField& f, const DiffusionField& G,
                                const DiffusionField& Q, const Prop1Options& opts);

struct Prop2Options {
    double T = 25.0;
    double dt = 0.01;
    int N = 20000;
    std::uint64_t seed = 3;
    std::optional<measures::GridSpec> grid;  // default centered on the equilibrium
    double r_max = 1.0;                      // contraction-ball search radius
    int ball_pairs = 4000;
    double snapshot_time = 0.5;
    double mass_tolerance = 0.02;
    int n_threads = 0;
};

// Tracks ball mass around a stable equilibrium on the grid and particle
// paths; the sink claim applies only when c* >= (d/2)(omega/r*)^2.
VerificationReport verify_prop2(const DriftField& f,
                                const contraction::EquilibriumRecord& equilibrium, double omega,
                                const sde::InitialMeasure& mu0, const Prop2Options& opts);

struct Thm2Options {
    double r_mass = 0.8;  // radius of the compared mass balls
    double r_hyp = 0.5;   // radius at which hypotheses (I)/(II) are instantiated
    std::optional<measures::GridSpec> grid;  // default [-4.3,4.3]^2, 201^2
    double fpe_tol = 1e-6;
    double fpe_max_T = 80.0;
    int N = 2000;
    double T_particles = 60.0;
    double dt = 0.01;
    std::uint64_t seed = 4;
    double mass_tolerance = 0.02;
    int n_angles = 2048;
    int n_threads = 0;
};

// Stationary concentration: mass near the deeper minima (+-x_a) must weakly
// dominate mass near the shallower ones (+-x_b) on both the grid and
// particle paths, gated on hypotheses (I) and (II) at r_hyp; the metric
// gradient-flow residual (III) is reported, never gated.
VerificationReport verify_thm2(const hopfield::HopfieldModel& model, const Eigen::Vector2d& x_a,
                               const Eigen::Vector2d& x_b, double omega,
                               const Thm2Options& opts);

}  // namespace driftlab::harness
