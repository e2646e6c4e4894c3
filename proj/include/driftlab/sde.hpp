#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "driftlab/fields.hpp"
#include "driftlab/rng.hpp"

// Euler-Maruyama simulation of dX = f dt + G dB: single paths, coupled pairs
// driven by one noise realization, and particle ensembles with counter-based
// per-particle noise streams (bit-identical results under any thread count).
namespace driftlab::sde {

using fields::DiffusionField;
using fields::DriftField;
using fields::Mat;
using fields::Vec;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::uint64_t seed = 0;
    double dt = 0.0;
};

// Two trajectories advanced with identical Brownian increments at every step.
struct CoupledPair {
    Trajectory trajectory_x;
    Trajectory trajectory_z;
    std::uint64_t shared_noise_seed = 0;
};

// particles is d x N; steps_taken continues the per-particle noise counters,
// so evolving in chunks reproduces a single long run bit-exactly.
struct ParticleEnsemble {
    double time = 0.0;
    Mat particles;
    std::uint64_t master_seed = 0;
    std::uint64_t steps_taken = 0;

    int dim() const { return static_cast<int>(particles.rows()); }
    int size() const { return static_cast<int>(particles.cols()); }
};

// Non-finite state during stepping. particle is -1 for single-path runs.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(const std::string& what, std::int64_t step_, std::int64_t particle_,
                    Vec state_)
        : std::runtime_error(what), step(step_), particle(particle_), state(std::move(state_)) {}

    std::int64_t step;
    std::int64_t particle;
    Vec state;
};

// Initial distribution with deterministic per-index sampling: particle i of a
// given master seed is the same point regardless of ensemble size or threads.
struct InitialMeasure {
    enum class Kind { dirac, gaussian, uniform_box, uniform_ball };

    static InitialMeasure point_mass(const Vec& point);
    static InitialMeasure gaussian(const Vec& mean, const Mat& cov);
    static InitialMeasure uniform_box(const Vec& lo, const Vec& hi);
    static InitialMeasure uniform_ball(const Vec& center, double radius);

    int dim() const { return static_cast<int>(a.size()); }
    Vec sample(const rng::Key& key, std::uint64_t index) const;

    Kind kind = Kind::dirac;
    Vec a;       // point / mean / lo / center
    Vec b;       // hi (uniform_box)
    Mat cov;     // gaussian
    double radius = 0.0;  // uniform_ball
};

// One Euler-Maruyama step x + f(t,x) dt + G(t,x) dW. Throws DivergenceError
// (step/particle -1) if the result is non-finite.
Vec step_em(const Vec& x, const DriftField& f, const DiffusionField& G, double t, double dt,
            const Vec& dW);

// T/dt must be integral within 1e-9 relative rounding; d noise components per
// step are drawn from the seed's counter-based stream.
Trajectory simulate_path(const DriftField& f, const DiffusionField& G, const Vec& x0, double T,
                         double dt, std::uint64_t seed);

// Both trajectories consume the identical dW sequence drawn from seed.
CoupledPair simulate_coupled_pair(const DriftField& f, const DiffusionField& G, const Vec& x0,
                                  const Vec& z0, double T, double dt, std::uint64_t seed);

ParticleEnsemble make_ensemble(const InitialMeasure& init, int n_particles,
                               std::uint64_t master_seed);

// Advances every particle n_steps with its own noise stream; n_threads = 0
// means hardware concurrency. On divergence throws the error with the
// smallest particle index (independent of thread count).
ParticleEnsemble evolve_ensemble(ParticleEnsemble e, const DriftField& f,
                                 const DiffusionField& G, double dt, int n_steps,
                                 int n_threads = 0);

// Advances two equally sized ensembles with per-index shared noise drawn from
// shared_seed: particle i of both ensembles sees the same dW at every step.
void evolve_coupled_ensembles(ParticleEnsemble& ex, ParticleEnsemble& ez, const DriftField& f,
                              const DiffusionField& G, double dt, int n_steps,
                              std::uint64_t shared_seed, int n_threads = 0);

}  // namespace driftlab::sde
