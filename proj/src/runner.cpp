#include "driftlab/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "driftlab/contraction.hpp"
#include "driftlab/csv.hpp"
#include "driftlab/fpe.hpp"
#include "driftlab/harness.hpp"
#include "driftlab/hopfield.hpp"
#include "driftlab/measures.hpp"
#include "driftlab/sde.hpp"

namespace driftlab::runner {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using config::ExperimentKind;
using fields::Vec;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) { return csv::format_double(v); }

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("DRIFTLAB_OUTPUT_DIR"); env && *env) return fs::path(env);
    return fs::path(cfg.output_dir);
}

int steps_for(double T, double dt, const char* who) {
    const double ratio = T / dt;
    const auto n = std::llround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(std::string(who) + ": T must be an integer multiple of dt");
    return static_cast<int>(n);
}

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
    return out;
}

std::pair<fields::DriftField, fields::DiffusionField> resolve_field(
    const config::FieldConfig& fc) {
    if (fc.drift.empty() && fc.diffusion.empty())
        throw std::invalid_argument("field needs a 'drift' or 'diffusion' catalog name");
    if (fc.diffusion.empty()) return fields::catalog_field(fc.drift, fc.params);
    auto g = fields::catalog_diffusion(fc.diffusion, fc.diffusion_params);
    auto f = fc.drift.empty() ? fields::zero_drift(g.dim_state())
                              : fields::catalog_drift(fc.drift, fc.params);
    if (f.dim() != g.dim_state())
        throw std::invalid_argument("drift dimension " + std::to_string(f.dim()) +
                                    " does not match diffusion dimension " +
                                    std::to_string(g.dim_state()));
    return {std::move(f), std::move(g)};
}

sde::InitialMeasure make_initial(const config::InitialConfig& ic, int dim) {
    Vec center = ic.center.empty() ? Vec::Zero(dim) : to_vec(ic.center);
    if (center.size() != dim)
        throw std::invalid_argument("initial.center has length " +
                                    std::to_string(center.size()) + ", system has dimension " +
                                    std::to_string(dim));
    if (ic.kind == "point") return sde::InitialMeasure::point_mass(center);
    if (ic.kind == "gaussian")
        return sde::InitialMeasure::gaussian(
            center, ic.var * Eigen::MatrixXd::Identity(dim, dim));
    if (ic.kind == "ball") return sde::InitialMeasure::uniform_ball(center, ic.radius);
    Vec lo = to_vec(ic.lo), hi = to_vec(ic.hi);
    if (lo.size() != dim)
        throw std::invalid_argument("initial box bounds must have length " + std::to_string(dim));
    return sde::InitialMeasure::uniform_box(lo, hi);
}

measures::GridSpec grid_spec(const config::GridConfig& g) {
    return measures::GridSpec(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny);
}

double require_isotropic_omega(const fields::DiffusionField& G, const char* who) {
    if (!G.constant_isotropic() || !(*G.constants().isotropic_amplitude > 0))
        throw std::invalid_argument(std::string(who) +
                                    " needs a positive constant isotropic diffusion");
    return *G.constants().isotropic_amplitude;
}

void write_report(const fs::path& out, const std::string& text) {
    std::ofstream f(out / "report.txt");
    if (!f) throw std::runtime_error("cannot write " + (out / "report.txt").string());
    f << text;
}

void write_meta(const ExperimentConfig& cfg, const fs::path& out) {
    std::vector<std::pair<std::string, std::string>> m;
    m.emplace_back("version", kVersion);
    m.emplace_back("experiment", config::to_string(cfg.experiment));
    if (!cfg.claim.empty()) m.emplace_back("claim", cfg.claim);
    m.emplace_back("seed", std::to_string(cfg.numerics.seed));
    m.emplace_back("seed_secondary", std::to_string(cfg.numerics.seed + 1) +
                                         " (two-system experiments only)");
    m.emplace_back("dt", fmt(cfg.numerics.dt));
    m.emplace_back("T", fmt(cfg.numerics.T));
    m.emplace_back("N", std::to_string(cfg.numerics.N));
    m.emplace_back("threads", std::to_string(cfg.numerics.threads));
    m.emplace_back("tolerance", fmt(cfg.numerics.tolerance));
    m.emplace_back("checkpoint", fmt(cfg.numerics.checkpoint));
    m.emplace_back("kernel_var", fmt(cfg.numerics.kernel_var));
    auto field_lines = [&](const char* prefix, const config::FieldConfig& fc) {
        if (!fc.drift.empty()) m.emplace_back(std::string(prefix) + ".drift", fc.drift);
        for (const auto& [k, v] : fc.params)
            m.emplace_back(std::string(prefix) + ".params." + k, fmt(v));
        if (!fc.diffusion.empty()) m.emplace_back(std::string(prefix) + ".diffusion", fc.diffusion);
        for (const auto& [k, v] : fc.diffusion_params)
            m.emplace_back(std::string(prefix) + ".diffusion_params." + k, fmt(v));
    };
    field_lines("field", cfg.field);
    if (cfg.field_b) field_lines("field_b", *cfg.field_b);
    if (cfg.grid)
        m.emplace_back("grid", fmt(cfg.grid->x_min) + ".." + fmt(cfg.grid->x_max) + " x " +
                                   fmt(cfg.grid->y_min) + ".." + fmt(cfg.grid->y_max) + " (" +
                                   std::to_string(cfg.grid->nx) + "x" +
                                   std::to_string(cfg.grid->ny) + ")");
    if (cfg.experiment == ExperimentKind::wasserstein) {
        m.emplace_back("w2.method", cfg.w2.method);
        m.emplace_back("w2.epsilon", fmt(cfg.w2.epsilon));
        m.emplace_back("w2.n_projections", std::to_string(cfg.w2.n_projections));
        m.emplace_back("w2.max_points", std::to_string(cfg.w2.max_points));
    }
    if (!cfg.equilibrium.empty()) {
        std::string e;
        for (double v : cfg.equilibrium) e += (e.empty() ? "" : ",") + fmt(v);
        m.emplace_back("equilibrium", e);
    }
    csv::write_meta(out / "meta.txt", m);
}

int verdict_status(harness::Verdict v) {
    switch (v) {
        case harness::Verdict::pass: return 0;
        case harness::Verdict::fail: return 1;
        case harness::Verdict::inconclusive: return 2;
    }
    return 3;
}

void write_series_files(const std::vector<harness::Series>& series, const fs::path& out) {
    for (const auto& s : series) csv::write_series(out / ("series_" + s.name + ".csv"), s);
}

int exp_simulate(const ExperimentConfig& cfg, const fs::path& out) {
    auto [f, G] = resolve_field(cfg.field);
    const auto& n = cfg.numerics;
    const auto mu0 = make_initial(cfg.initial, f.dim());
    const int steps = steps_for(n.T, n.dt, "simulate");

    auto probe = sde::make_ensemble(mu0, 1, n.seed);
    const auto traj = sde::simulate_path(f, G, probe.particles.col(0), n.T, n.dt, n.seed);
    csv::write_trajectory(out / "series_path.csv", traj);

    auto e = sde::make_ensemble(mu0, n.N, n.seed);
    e = sde::evolve_ensemble(std::move(e), f, G, n.dt, steps, n.threads);
    csv::write_ensemble(out / "series_ensemble.csv", e);

    const Vec mean = e.particles.rowwise().mean();
    std::string rep = "experiment: simulate\nstatus: success\n";
    rep += "drift: " + f.name() + "\ndiffusion: " + G.name() + "\n";
    rep += "particles: " + std::to_string(n.N) + ", T = " + fmt(n.T) + ", dt = " + fmt(n.dt) + "\n";
    for (int i = 0; i < f.dim(); ++i) {
        const double var = (e.particles.row(i).array() - mean(i)).square().mean();
        rep += "terminal mean x" + std::to_string(i + 1) + " = " + fmt(mean(i)) +
               ", variance = " + fmt(var) + "\n";
    }
    write_report(out, rep);
    return 0;
}

int exp_stationary(const ExperimentConfig& cfg, const fs::path& out) {
    auto [f, G] = resolve_field(cfg.field);
    if (f.dim() != 2) throw std::invalid_argument("stationary: the density monitor needs d = 2");
    const auto& n = cfg.numerics;
    const auto grid = cfg.grid ? grid_spec(*cfg.grid) : measures::GridSpec(-2.5, 2.5, -2.5, 2.5, 64, 64);
    const Eigen::Matrix2d kcov = n.kernel_var * Eigen::Matrix2d::Identity();

    auto e = sde::make_ensemble(make_initial(cfg.initial, 2), n.N, n.seed);
    measures::ConvergenceMonitor monitor(n.tolerance);
    auto kde = measures::kde_grid(e.particles, kcov, grid);
    monitor.push(kde.density);
    const int chunk = steps_for(n.checkpoint, n.dt, "stationary checkpoint");
    const int max_chunks = std::max(1, static_cast<int>(std::llround(n.T / n.checkpoint)));
    harness::Series res{"monitor", {"t", "residual"}, {}};
    for (int k = 0; k < max_chunks && !monitor.converged(); ++k) {
        e = sde::evolve_ensemble(std::move(e), f, G, n.dt, chunk, n.threads);
        kde = measures::kde_grid(e.particles, kcov, grid);
        res.rows.push_back({e.time, monitor.push(kde.density)});
    }
    csv::write_series(out / "series_monitor.csv", res);
    csv::write_grid(out / "grid_kde.csv", kde.density);
    csv::write_ensemble(out / "series_ensemble.csv", e);

    std::string rep = "experiment: stationary\n";
    rep += std::string("status: ") + (monitor.converged() ? "converged" : "not converged") + "\n";
    rep += "threshold: " + fmt(n.tolerance) + "\n";
    rep += "final residual: " + fmt(res.rows.empty() ? 0.0 : res.rows.back()[1]) + "\n";
    rep += "time reached: " + fmt(e.time) + "\n";
    rep += "kde grid mass: " + fmt(kde.grid_mass) + ", escaped: " + fmt(kde.escaped_mass) + "\n";
    write_report(out, rep);
    return monitor.converged() ? 0 : 1;
}

int exp_wasserstein(const ExperimentConfig& cfg, const fs::path& out) {
    auto [fa, Ga] = resolve_field(cfg.field);
    auto [fb, Gb] = cfg.field_b ? resolve_field(*cfg.field_b)
                                : std::pair<fields::DriftField, fields::DiffusionField>{fa, Ga};
    if (fa.dim() != fb.dim())
        throw std::invalid_argument("wasserstein: the two systems must share a dimension");
    const auto& n = cfg.numerics;
    const int steps = steps_for(n.T, n.dt, "wasserstein");

    auto ea = sde::make_ensemble(make_initial(cfg.initial, fa.dim()), n.N, n.seed);
    auto eb = sde::make_ensemble(
        make_initial(cfg.initial_b ? *cfg.initial_b : cfg.initial, fb.dim()), n.N, n.seed + 1);
    ea = sde::evolve_ensemble(std::move(ea), fa, Ga, n.dt, steps, n.threads);
    eb = sde::evolve_ensemble(std::move(eb), fb, Gb, n.dt, steps, n.threads);
    csv::write_ensemble(out / "series_ensemble_a.csv", ea);
    csv::write_ensemble(out / "series_ensemble_b.csv", eb);

    measures::W2Method method = measures::W2Method::exact_assignment;
    if (cfg.w2.method == "entropic") method = measures::W2Method::entropic;
    if (cfg.w2.method == "sliced") method = measures::W2Method::sliced;
    measures::W2Options opts;
    opts.seed = n.seed;
    opts.epsilon = cfg.w2.epsilon;
    opts.n_projections = cfg.w2.n_projections;
    opts.max_exact_points = cfg.w2.max_points;
    const auto res = measures::wasserstein2(ea.particles, eb.particles, method, opts);

    std::string rep = "experiment: wasserstein\nstatus: success\n";
    rep += "method: " + cfg.w2.method + "\n";
    rep += "w2 = " + fmt(res.value) + "\n";
    rep += "w2_squared = " + fmt(res.value * res.value) + "\n";
    rep += "points used per side: " + std::to_string(res.n_used) + "\n";
    if (method == measures::W2Method::entropic) {
        rep += "epsilon = " + fmt(res.epsilon) + "\n";
        rep += "iterations = " + std::to_string(res.iterations) + "\n";
        rep += "marginal residual = " + fmt(res.marginal_residual) + "\n";
    }
    write_report(out, rep);
    return 0;
}

int exp_verify(const ExperimentConfig& cfg, const fs::path& out) {
    auto [f, G] = resolve_field(cfg.field);
    const auto& n = cfg.numerics;
    harness::VerificationReport rep;

    if (cfg.claim == "thm1_decay") {
        harness::Thm1Options o;
        o.T = n.T;
        o.dt = n.dt;
        o.n_pairs = n.N;
        o.seed = n.seed;
        o.n_threads = n.threads;
        o.n_checkpoints = std::max(10, static_cast<int>(std::llround(n.T / n.checkpoint)));
        const auto mu0 = make_initial(cfg.initial, f.dim());
        const auto nu0 = cfg.initial_b
                             ? make_initial(*cfg.initial_b, f.dim())
                             : sde::InitialMeasure::point_mass(Vec::Constant(f.dim(), 2.0));
        rep = harness::verify_thm1(f, G, mu0, nu0, o);
    } else if (cfg.claim == "prop1_chi_bound") {
        if (!cfg.field_b)
            throw std::invalid_argument(
                "prop1_chi_bound needs 'field_b' supplying the comparison diffusion");
        if (!cfg.field_b->drift.empty() && cfg.field_b->drift != cfg.field.drift)
            throw std::invalid_argument("prop1_chi_bound compares diffusions under one drift; "
                                        "'field_b.drift' must be empty or match 'field.drift'");
        auto [fb, Q] = resolve_field(*cfg.field_b);
        harness::Prop1Options o;
        o.T = n.T;
        o.dt = n.dt;
        o.N = n.N;
        o.seed = n.seed;
        o.n_threads = n.threads;
        o.checkpoint_time = n.checkpoint;
        if (cfg.grid) o.monitor_grid = grid_spec(*cfg.grid);
        o.monitor_kernel_var = n.kernel_var;
        rep = harness::verify_prop1(f, G, Q, o);
    } else if (cfg.claim == "prop2_mass_sink") {
        const double omega = require_isotropic_omega(G, "prop2_mass_sink");
        contraction::Box region = cfg.grid
                                      ? contraction::Box(to_vec({cfg.grid->x_min, cfg.grid->y_min}),
                                                         to_vec({cfg.grid->x_max, cfg.grid->y_max}))
                                      : contraction::Box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
        const auto roots = contraction::find_equilibria(f, region, 64, 1e-10, n.seed);
        const Vec hint = cfg.equilibrium.empty() ? Vec::Zero(2) : to_vec(cfg.equilibrium);
        if (hint.size() != 2)
            throw std::invalid_argument("'equilibrium' must have two components");
        const contraction::EquilibriumRecord* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& r : roots.records) {
            if (!r.stable) continue;
            const double d = (r.x_star - hint).norm();
            if (d < best_d) {
                best_d = d;
                best = &r;
            }
        }
        if (!best) throw std::invalid_argument("prop2_mass_sink: no stable equilibrium found");
        if (!cfg.equilibrium.empty() && best_d > 0.5)
            throw std::invalid_argument(
                "prop2_mass_sink: no stable equilibrium within 0.5 of the configured point");
        harness::Prop2Options o;
        o.T = n.T;
        o.dt = n.dt;
        o.N = n.N;
        o.seed = n.seed;
        o.n_threads = n.threads;
        o.snapshot_time = n.checkpoint;
        if (cfg.grid) o.grid = grid_spec(*cfg.grid);
        rep = harness::verify_prop2(f, *best, omega, make_initial(cfg.initial, 2), o);
    } else if (cfg.claim == "thm2_concentration") {
        if (cfg.field.drift != "hopfield_global" && cfg.field.drift != "hopfield_multistable")
            throw std::invalid_argument("thm2_concentration needs a hopfield drift entry");
        const double omega = require_isotropic_omega(G, "thm2_concentration");
        auto value_or = [&](const char* key, double fallback) {
            auto it = cfg.field.params.find(key);
            return it == cfg.field.params.end() ? fallback : it->second;
        };
        const bool multi = cfg.field.drift == "hopfield_multistable";
        const double beta = value_or("beta", 2.0);
        const Eigen::Vector2d u(value_or("u1", multi ? 1.0 : 0.2),
                                value_or("u2", multi ? 3.0 : 0.25));
        const auto model = hopfield::make_hopfield(u, beta);
        const auto named = hopfield::named_equilibria(model);
        if (named.size() != 5)
            throw std::invalid_argument(
                "thm2_concentration needs both input gains above 1/beta (multistable regime)");
        hopfield::EnergyLandscape land{model};
        const Eigen::Vector2d cand_a = named[1], cand_b = named[3];
        const bool a_deeper = land.energy(cand_a) <= land.energy(cand_b);
        const Eigen::Vector2d x_a = a_deeper ? cand_a : cand_b;
        const Eigen::Vector2d x_b = a_deeper ? cand_b : cand_a;
        harness::Thm2Options o;
        o.N = n.N;
        o.dt = n.dt;
        o.seed = n.seed;
        o.n_threads = n.threads;
        o.T_particles = n.T;
        o.fpe_tol = n.tolerance;
        if (cfg.grid) o.grid = grid_spec(*cfg.grid);
        rep = harness::verify_thm2(model, x_a, x_b, omega, o);
    } else {
        throw std::invalid_argument("unknown claim '" + cfg.claim + "'");
    }

    write_report(out, rep.to_text());
    write_series_files(rep.series, out);
    return verdict_status(rep.verdict);
}

int exp_hopfield_demo(const ExperimentConfig& cfg, const fs::path& out) {
    // The pipeline is pinned: beta = 2, u = (0.2, 0.25), trig diagonal
    // diffusion with amplitude 0.4, N = 2000, dt = 0.01, kernel variance 2*I,
    // monitor threshold 1e-6. Config supplies seed, threads, T cap, grid.
    const auto model = hopfield::make_hopfield({0.2, 0.25}, 2.0);
    const auto f = model.drift_field();
    const auto G = fields::catalog_diffusion("paper_inhomogeneous_diffusion", {{"a", 0.4}});
    const int N = 2000;
    const double dt = 0.01, threshold = 1e-6;
    const Eigen::Matrix2d kcov = 2.0 * Eigen::Matrix2d::Identity();
    const auto& n = cfg.numerics;
    const auto grid = cfg.grid ? grid_spec(*cfg.grid) : measures::GridSpec(-5, 5, -5, 5, 64, 64);

    auto e = sde::make_ensemble(make_initial(cfg.initial, 2), N, n.seed);
    measures::ConvergenceMonitor monitor(threshold);
    monitor.push(measures::kde_grid(e.particles, kcov, grid).density);
    const int chunk = steps_for(n.checkpoint, dt, "hopfield-demo checkpoint");
    const int max_chunks = std::max(1, static_cast<int>(std::llround(n.T / n.checkpoint)));

    std::vector<std::pair<double, Eigen::MatrixXd>> snapshots;
    snapshots.emplace_back(0.0, e.particles);
    harness::Series res{"monitor", {"t", "residual"}, {}};
    measures::KdeResult kde;
    for (int k = 0; k < max_chunks && !monitor.converged(); ++k) {
        e = sde::evolve_ensemble(std::move(e), f, G, dt, chunk, n.threads);
        kde = measures::kde_grid(e.particles, kcov, grid);
        res.rows.push_back({e.time, monitor.push(kde.density)});
        snapshots.emplace_back(e.time, e.particles);
    }

    measures::W2Options w2o;
    w2o.seed = n.seed;
    w2o.max_exact_points = 512;
    harness::Series sw2{"w2", {"t", "w2"}, {}};
    for (const auto& [t, cloud] : snapshots) {
        const double w2 = measures::wasserstein2(cloud, e.particles,
                                                 measures::W2Method::exact_assignment, w2o)
                              .value;
        sw2.rows.push_back({t, w2});
    }
    csv::write_series(out / "series_w2.csv", sw2);
    csv::write_series(out / "series_monitor.csv", res);
    csv::write_grid(out / "grid_kde.csv", kde.density);
    csv::write_ensemble(out / "series_ensemble.csv", e);

    std::string rep = "experiment: hopfield-demo\nstatus: success\n";
    rep += "beta = 2, u = (0.2, 0.25), diffusion = 0.4*diag(sin x1, cos x2)\n";
    rep += "N = 2000, dt = 0.01, kernel variance = 2*I, threshold = 1e-6\n";
    rep += std::string("monitor converged: ") + (monitor.converged() ? "yes" : "no") + "\n";
    rep += "final residual: " + fmt(res.rows.empty() ? 0.0 : res.rows.back()[1]) + "\n";
    rep += "time reached: " + fmt(e.time) + "\n";
    rep += "terminal w2 to itself: " + fmt(sw2.rows.back()[1]) + "\n";
    write_report(out, rep);
    return 0;
}

int exp_fpe_solve(const ExperimentConfig& cfg, const fs::path& out) {
    auto [f, G] = resolve_field(cfg.field);
    if (f.dim() != 2) throw std::invalid_argument("fpe-solve: the grid solver needs d = 2");
    const auto& n = cfg.numerics;
    const auto grid = cfg.grid ? grid_spec(*cfg.grid) : measures::GridSpec(-2.5, 2.5, -2.5, 2.5, 64, 64);
    fpe::FpeSolver solver(fpe::FpeProblem{f, G, grid, 0.0});
    auto density = fpe::discretize_measure(make_initial(cfg.initial, 2), grid);

    const int stride = std::max(1, static_cast<int>(std::llround(n.checkpoint / solver.dt())));
    const int max_steps = static_cast<int>(std::llround(n.T / solver.dt()));
    measures::ConvergenceMonitor monitor(n.tolerance);
    monitor.push(density);
    harness::Series res{"residual", {"t", "residual"}, {}};
    int steps = 0;
    while (steps < max_steps && !monitor.converged()) {
        const int k = std::min(stride, max_steps - steps);
        for (int s = 0; s < k; ++s) solver.step(density);
        steps += k;
        res.rows.push_back({steps * solver.dt(), monitor.push(density)});
    }
    csv::write_series(out / "series_residual.csv", res);
    csv::write_grid(out / "grid_density.csv", density);

    std::string rep = "experiment: fpe-solve\n";
    rep += std::string("status: ") + (monitor.converged() ? "converged" : "not converged") + "\n";
    rep += "dt = " + fmt(solver.dt()) + " (cfl bound " + fmt(solver.cfl_bound()) +
           ", positivity bound " + fmt(solver.positivity_bound()) + ")\n";
    rep += "steps = " + std::to_string(steps) + "\n";
    rep += "threshold = " + fmt(n.tolerance) + "\n";
    rep += "final residual = " + fmt(res.rows.empty() ? 0.0 : res.rows.back()[1]) + "\n";
    rep += "grid mass = " + fmt(density.values.sum() * density.grid.cell_area()) + "\n";
    write_report(out, rep);
    return monitor.converged() ? 0 : 1;
}

int exp_lemma_report(const ExperimentConfig& cfg, const fs::path& out) {
    auto [f, G] = resolve_field(cfg.field);
    if (f.dim() != 2) throw std::invalid_argument("lemma-report: needs d = 2");
    const Vec center = cfg.equilibrium.empty() ? Vec::Zero(2) : to_vec(cfg.equilibrium);
    if (center.size() != 2) throw std::invalid_argument("'equilibrium' must have two components");
    const double radius = cfg.initial.radius;
    const int nodes = std::clamp(cfg.numerics.N, 16, 8192);
    const auto q = fpe::make_surface_quadrature(Eigen::Vector2d(center(0), center(1)), radius, nodes);

    auto A = [&](const Eigen::Vector2d& x) -> Eigen::Matrix2d {
        const fields::Mat g = G(0.0, Vec(x));
        return 0.5 * (g * g.transpose());
    };
    auto v = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d {
        const Vec fx = f(0.0, Vec(x));
        return Eigen::Vector2d(fx(0), fx(1));
    };
    const auto two_sided = fpe::lemma_tr_two_sided(A, v, q);

    std::string rep = "experiment: lemma-report\nstatus: success (informational, no verdict)\n";
    rep += "circle center = (" + fmt(center(0)) + ", " + fmt(center(1)) + "), radius = " +
           fmt(radius) + ", nodes = " + std::to_string(nodes) + "\n";
    rep += "lhs (row-divergence side) = " + fmt(two_sided.lhs) + "\n";
    rep += "rhs (contraction side)   = " + fmt(two_sided.rhs) + "\n";
    rep += "gap = " + fmt(two_sided.gap) + "\n";
    write_report(out, rep);
    return 0;
}

}  // namespace

int run(const ExperimentConfig& cfg) {
    const fs::path out = resolve_output_dir(cfg);
    try {
        fs::create_directories(out);
        write_meta(cfg, out);
        switch (cfg.experiment) {
            case ExperimentKind::simulate: return exp_simulate(cfg, out);
            case ExperimentKind::stationary: return exp_stationary(cfg, out);
            case ExperimentKind::wasserstein: return exp_wasserstein(cfg, out);
            case ExperimentKind::verify: return exp_verify(cfg, out);
            case ExperimentKind::hopfield_demo: return exp_hopfield_demo(cfg, out);
            case ExperimentKind::fpe_solve: return exp_fpe_solve(cfg, out);
            case ExperimentKind::lemma_report: return exp_lemma_report(cfg, out);
        }
        throw std::logic_error("unhandled experiment kind");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::error_code ec;
        if (fs::exists(out, ec)) {
            std::ofstream rep(out / "report.txt");
            if (rep) rep << "status: error\nwhat: " << e.what() << "\n";
        }
        return 3;
    }
}

int run_config_file(const fs::path& path) {
    config::ExperimentConfig cfg;
    try {
        cfg = config::load_config_file(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return run(cfg);
}

}  // namespace driftlab::runner
