#include "driftlab/sde.hpp"

#include <cmath>
#include <optional>
#include <thread>

namespace driftlab::sde {

namespace {

int resolve_threads(int n_threads, int n_items) {
    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    return std::min(n_threads, n_items);
}

// runs body(i) over [0, n) on a static partition; rethrows the divergence
// error with the smallest particle index, other exceptions first-block-first
void parallel_particles(int n, int n_threads, const std::function<void(int)>& body) {
    n_threads = resolve_threads(n_threads, n);
    if (n_threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::optional<DivergenceError>> divergences(n_threads);
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int b = 0; b < n_threads; ++b) {
        const int lo = static_cast<int>(static_cast<std::int64_t>(n) * b / n_threads);
        const int hi = static_cast<int>(static_cast<std::int64_t>(n) * (b + 1) / n_threads);
        pool.emplace_back([&, b, lo, hi]() {
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (const DivergenceError& e) {
                divergences[b] = e;
            } catch (...) {
                errors[b] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    std::optional<DivergenceError> worst;
    for (const auto& d : divergences)
        if (d && (!worst || d->particle < worst->particle)) worst = d;
    if (worst) throw *worst;
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int checked_step_count(double T, double dt) {
    if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("simulate: need T > 0 and dt > 0");
    const double ratio = T / dt;
    const auto n = static_cast<std::int64_t>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("simulate: T/dt must be integral within rounding");
    return static_cast<int>(n);
}

void fill_noise(Vec& dW, const rng::Key& key, std::uint64_t stream, std::uint64_t counter,
                double sqrt_dt) {
    for (int c = 0; c < dW.size(); ++c)
        dW(c) = sqrt_dt * rng::normal(key, stream, counter, static_cast<std::uint64_t>(c));
}

// in-place step with reusable workspaces; throws on non-finite result
void step_into(Vec& x, const DriftField& f, const DiffusionField& G, double t, double dt,
               const Vec& dW, Vec& fx, Mat& gx, std::int64_t step, std::int64_t particle) {
    f.eval_into(t, x, fx);
    if (G.constant_isotropic()) {
        x += dt * fx + *G.constants().isotropic_amplitude * dW;
    } else {
        G.eval_into(t, x, gx);
        x += dt * fx;
        x.noalias() += gx * dW;
    }
    if (!x.allFinite())
        throw DivergenceError("non-finite state after step " + std::to_string(step) +
                                  (particle >= 0 ? " of particle " + std::to_string(particle)
                                                 : std::string()),
                              step, particle, x);
}

}  // namespace

InitialMeasure InitialMeasure::point_mass(const Vec& point) {
    InitialMeasure m;
    m.kind = Kind::dirac;
    m.a = point;
    return m;
}

InitialMeasure InitialMeasure::gaussian(const Vec& mean, const Mat& cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw std::invalid_argument("InitialMeasure: covariance shape mismatch");
    if (Eigen::LLT<Mat>(cov).info() != Eigen::Success)
        throw std::invalid_argument("InitialMeasure: covariance must be positive definite");
    InitialMeasure m;
    m.kind = Kind::gaussian;
    m.a = mean;
    m.cov = cov;
    return m;
}

InitialMeasure InitialMeasure::uniform_box(const Vec& lo, const Vec& hi) {
    if (lo.size() != hi.size() || ((hi - lo).array() <= 0).any())
        throw std::invalid_argument("InitialMeasure: box needs hi > lo per axis");
    InitialMeasure m;
    m.kind = Kind::uniform_box;
    m.a = lo;
    m.b = hi;
    return m;
}

InitialMeasure InitialMeasure::uniform_ball(const Vec& center, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("InitialMeasure: ball radius must be > 0");
    InitialMeasure m;
    m.kind = Kind::uniform_ball;
    m.a = center;
    m.radius = radius;
    return m;
}

Vec InitialMeasure::sample(const rng::Key& key, std::uint64_t index) const {
    const int d = dim();
    Vec x(d);
    switch (kind) {
        case Kind::dirac: return a;
        case Kind::gaussian: {
            for (int c = 0; c < d; ++c)
                x(c) = rng::normal(key, index, 0, static_cast<std::uint64_t>(c));
            return a + Eigen::LLT<Mat>(cov).matrixL() * x;
        }
        case Kind::uniform_box: {
            for (int c = 0; c < d; ++c)
                x(c) = rng::uniform01(key, index, 0, static_cast<std::uint64_t>(c));
            return a + (b - a).cwiseProduct(x);
        }
        case Kind::uniform_ball: {
            // radius * U^{1/d} times a uniform direction is uniform in the ball
            for (int c = 0; c < d; ++c)
                x(c) = rng::normal(key, index, 0, static_cast<std::uint64_t>(c));
            const double u = rng::uniform01(key, index, 1, 0);
            return a + (radius * std::pow(u, 1.0 / d) / x.norm()) * x;
        }
    }
    throw std::logic_error("InitialMeasure: unknown kind");
}

Vec step_em(const Vec& x, const DriftField& f, const DiffusionField& G, double t, double dt,
            const Vec& dW) {
    if (!(dt > 0)) throw std::invalid_argument("step_em: dt must be > 0");
    if (dW.size() != G.dim_noise())
        throw std::invalid_argument("step_em: dW has dimension " + std::to_string(dW.size()) +
                                    ", diffusion expects " + std::to_string(G.dim_noise()));
    Vec out = x, fx;
    Mat gx;
    step_into(out, f, G, t, dt, dW, fx, gx, 0, -1);
    return out;
}

Trajectory simulate_path(const DriftField& f, const DiffusionField& G, const Vec& x0, double T,
                         double dt, std::uint64_t seed) {
    const int n_steps = checked_step_count(T, dt);
    const auto key = rng::derive(seed, rng::Purpose::noise);
    const double sqrt_dt = std::sqrt(dt);
    Trajectory traj;
    traj.seed = seed;
    traj.dt = dt;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    Vec x = x0, fx, dW(G.dim_noise());
    Mat gx;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (int k = 0; k < n_steps; ++k) {
        fill_noise(dW, key, 0, static_cast<std::uint64_t>(k), sqrt_dt);
        step_into(x, f, G, k * dt, dt, dW, fx, gx, k, -1);
        traj.times.push_back((k + 1) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

CoupledPair simulate_coupled_pair(const DriftField& f, const DiffusionField& G, const Vec& x0,
                                  const Vec& z0, double T, double dt, std::uint64_t seed) {
    const int n_steps = checked_step_count(T, dt);
    const auto key = rng::derive(seed, rng::Purpose::noise);
    const double sqrt_dt = std::sqrt(dt);
    CoupledPair pair;
    pair.shared_noise_seed = seed;
    for (Trajectory* t : {&pair.trajectory_x, &pair.trajectory_z}) {
        t->seed = seed;
        t->dt = dt;
        t->times.reserve(n_steps + 1);
        t->states.reserve(n_steps + 1);
        t->times.push_back(0.0);
    }
    Vec x = x0, z = z0, fx, dW(G.dim_noise());
    Mat gx;
    pair.trajectory_x.states.push_back(x);
    pair.trajectory_z.states.push_back(z);
    for (int k = 0; k < n_steps; ++k) {
        fill_noise(dW, key, 0, static_cast<std::uint64_t>(k), sqrt_dt);
        step_into(x, f, G, k * dt, dt, dW, fx, gx, k, -1);
        step_into(z, f, G, k * dt, dt, dW, fx, gx, k, -1);
        pair.trajectory_x.times.push_back((k + 1) * dt);
        pair.trajectory_x.states.push_back(x);
        pair.trajectory_z.times.push_back((k + 1) * dt);
        pair.trajectory_z.states.push_back(z);
    }
    return pair;
}

ParticleEnsemble make_ensemble(const InitialMeasure& init, int n_particles,
                               std::uint64_t master_seed) {
    if (n_particles < 1) throw std::invalid_argument("make_ensemble: need at least one particle");
    const auto key = rng::derive(master_seed, rng::Purpose::init);
    ParticleEnsemble e;
    e.master_seed = master_seed;
    e.particles.resize(init.dim(), n_particles);
    for (int i = 0; i < n_particles; ++i)
        e.particles.col(i) = init.sample(key, static_cast<std::uint64_t>(i));
    return e;
}

ParticleEnsemble evolve_ensemble(ParticleEnsemble e, const DriftField& f,
                                 const DiffusionField& G, double dt, int n_steps,
                                 int n_threads) {
    if (!(dt > 0)) throw std::invalid_argument("evolve_ensemble: dt must be > 0");
    if (n_steps < 0) throw std::invalid_argument("evolve_ensemble: n_steps must be >= 0");
    if (e.dim() != f.dim())
        throw std::invalid_argument("evolve_ensemble: ensemble/field dimension mismatch");
    if (n_steps == 0) return e;
    const auto key = rng::derive(e.master_seed, rng::Purpose::noise);
    const double sqrt_dt = std::sqrt(dt);
    const double t0 = e.time;
    const std::uint64_t k0 = e.steps_taken;
    parallel_particles(e.size(), n_threads, [&](int i) {
        Vec x = e.particles.col(i), fx, dW(G.dim_noise());
        Mat gx;
        for (int k = 0; k < n_steps; ++k) {
            fill_noise(dW, key, static_cast<std::uint64_t>(i), k0 + k, sqrt_dt);
            step_into(x, f, G, t0 + k * dt, dt, dW, fx, gx,
                      static_cast<std::int64_t>(k0) + k, i);
        }
        e.particles.col(i) = x;
    });
    e.time = t0 + n_steps * dt;
    e.steps_taken = k0 + static_cast<std::uint64_t>(n_steps);
    return e;
}

void evolve_coupled_ensembles(ParticleEnsemble& ex, ParticleEnsemble& ez, const DriftField& f,
                              const DiffusionField& G, double dt, int n_steps,
                              std::uint64_t shared_seed, int n_threads) {
    if (!(dt > 0)) throw std::invalid_argument("evolve_coupled_ensembles: dt must be > 0");
    if (n_steps < 0)
        throw std::invalid_argument("evolve_coupled_ensembles: n_steps must be >= 0");
    if (ex.size() != ez.size() || ex.dim() != ez.dim())
        throw std::invalid_argument("evolve_coupled_ensembles: ensembles must match in shape");
    if (ex.steps_taken != ez.steps_taken)
        throw std::invalid_argument(
            "evolve_coupled_ensembles: ensembles disagree on steps taken, noise counters "
            "would desynchronize");
    if (n_steps == 0) return;
    const auto key = rng::derive(shared_seed, rng::Purpose::noise);
    const double sqrt_dt = std::sqrt(dt);
    const double t0 = ex.time;
    const std::uint64_t k0 = ex.steps_taken;
    parallel_particles(ex.size(), n_threads, [&](int i) {
        Vec x = ex.particles.col(i), z = ez.particles.col(i), fx, dW(G.dim_noise());
        Mat gx;
        for (int k = 0; k < n_steps; ++k) {
            fill_noise(dW, key, static_cast<std::uint64_t>(i), k0 + k, sqrt_dt);
            step_into(x, f, G, t0 + k * dt, dt, dW, fx, gx,
                      static_cast<std::int64_t>(k0) + k, i);
            step_into(z, f, G, t0 + k * dt, dt, dW, fx, gx,
                      static_cast<std::int64_t>(k0) + k, i);
        }
        ex.particles.col(i) = x;
        ez.particles.col(i) = z;
    });
    for (ParticleEnsemble* e : {&ex, &ez}) {
        e->time = t0 + n_steps * dt;
        e->steps_taken = k0 + static_cast<std::uint64_t>(n_steps);
    }
}

}  // namespace driftlab::sde
