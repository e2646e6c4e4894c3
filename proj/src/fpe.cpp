#include "driftlab/fpe.hpp"

#include <cmath>

namespace driftlab::fpe {

namespace {

// B(x) = x/(e^x - 1), the exponential-fitting weight; B(-x) = e^x B(x)
double bernoulli(double x) {
    if (std::abs(x) < 1e-10) return 1.0 - 0.5 * x;
    if (x > 500.0) return 0.0;
    if (x < -500.0) return -x;
    return x / std::expm1(x);
}

struct FaceCoeffs {
    double a, b;
};

// coefficients for flux J = a*mu_left - b*mu_right through one face
FaceCoeffs face_coeffs(double v, double d_half, double h) {
    if (d_half <= 0) return {std::max(v, 0.0), std::max(-v, 0.0)};
    const double p = v * h / d_half;
    return {d_half / h * bernoulli(-p), d_half / h * bernoulli(p)};
}

}  // namespace

FpeSolver::FpeSolver(FpeProblem p) : problem_(std::move(p)) {
    const GridSpec& g = problem_.grid;
    const auto& f = problem_.drift;
    const auto& G = problem_.diffusion;
    if (f.dim() != 2 || G.dim_state() != 2)
        throw std::invalid_argument("FpeSolver: drift and diffusion must be 2-dimensional");
    if (f.time_dependent() || G.time_dependent())
        throw std::invalid_argument("FpeSolver: fields must be autonomous");

    const double hx = g.hx(), hy = g.hy();
    Eigen::MatrixXd dxx(g.nx, g.ny), dyy(g.nx, g.ny);
    double max_d = 0.0, max_f = 0.0;
    fields::Vec x(2), fx(2);
    fields::Mat gx;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            x << g.cx(i), g.cy(j);
            G.eval_into(0.0, x, gx);
            const Eigen::Matrix2d D = gx * gx.transpose();
            if (std::abs(D(0, 1)) > 1e-13 * (1.0 + D.trace()))
                throw std::invalid_argument(
                    "FpeSolver: diffusion matrix D = G G^T must be diagonal on the grid");
            dxx(i, j) = D(0, 0);
            dyy(i, j) = D(1, 1);
            max_d = std::max({max_d, D(0, 0), D(1, 1)});
            f.eval_into(0.0, x, fx);
            max_f = std::max(max_f, fx.norm());
        }
    }

    ax_.setZero(g.nx + 1, g.ny);
    bx_.setZero(g.nx + 1, g.ny);
    ay_.setZero(g.nx, g.ny + 1);
    by_.setZero(g.nx, g.ny + 1);

    // interior x-faces: drift and diffusion evaluated at the face midpoint,
    // d(Dxx)/dx from the adjacent cell centers
    for (int i = 1; i < g.nx; ++i) {
        const double fxpos = g.x_min + i * hx;
        for (int j = 0; j < g.ny; ++j) {
            x << fxpos, g.cy(j);
            f.eval_into(0.0, x, fx);
            G.eval_into(0.0, x, gx);
            const double d_half = 0.5 * (gx.row(0) * gx.row(0).transpose())(0);
            const double v = fx(0) - 0.5 * (dxx(i, j) - dxx(i - 1, j)) / hx;
            const FaceCoeffs c = face_coeffs(v, d_half, hx);
            ax_(i, j) = c.a;
            bx_(i, j) = c.b;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        const double fypos = g.y_min + j * hy;
        for (int i = 0; i < g.nx; ++i) {
            x << g.cx(i), fypos;
            f.eval_into(0.0, x, fx);
            G.eval_into(0.0, x, gx);
            const double d_half = 0.5 * (gx.row(1) * gx.row(1).transpose())(0);
            const double v = fx(1) - 0.5 * (dyy(i, j) - dyy(i, j - 1)) / hy;
            const FaceCoeffs c = face_coeffs(v, d_half, hy);
            ay_(i, j) = c.a;
            by_(i, j) = c.b;
        }
    }

    double s_max = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            s_max = std::max(s_max, (bx_(i, j) + ax_(i + 1, j)) / hx +
                                        (by_(i, j) + ay_(i, j + 1)) / hy);

    const double h = std::min(hx, hy);
    const double inf = std::numeric_limits<double>::infinity();
    cfl_bound_ = std::min(max_d > 0 ? h * h / (2.0 * max_d) : inf,
                          max_f > 0 ? h / max_f : inf);
    positivity_bound_ = s_max > 0 ? 1.0 / s_max : inf;

    if (problem_.dt > 0) {
        if (problem_.dt > cfl_bound_ || problem_.dt > positivity_bound_)
            throw std::invalid_argument(
                "FpeSolver: dt " + std::to_string(problem_.dt) + " violates stability bound " +
                std::to_string(std::min(cfl_bound_, positivity_bound_)));
        dt_ = problem_.dt;
    } else {
        dt_ = std::min(0.5 * cfl_bound_, 0.9 * positivity_bound_);
        if (!std::isfinite(dt_))
            throw std::invalid_argument("FpeSolver: zero dynamics, supply dt explicitly");
        problem_.dt = dt_;
    }

    jx_.setZero(g.nx + 1, g.ny);
    jy_.setZero(g.nx, g.ny + 1);
    next_.setZero(g.nx, g.ny);
}

void FpeSolver::step(GridDensity& density) const {
    const GridSpec& g = problem_.grid;
    if (!density.grid.same_as(g)) throw std::invalid_argument("FpeSolver: density grid mismatch");
    const Eigen::MatrixXd& mu = density.values;

    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            jx_(i, j) = ax_(i, j) * mu(i - 1, j) - bx_(i, j) * mu(i, j);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            jy_(i, j) = ay_(i, j) * mu(i, j - 1) - by_(i, j) * mu(i, j);

    const double rx = dt_ / g.hx(), ry = dt_ / g.hy();
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            next_(i, j) = mu(i, j) + rx * (jx_(i, j) - jx_(i + 1, j)) +
                          ry * (jy_(i, j) - jy_(i, j + 1));

    if (next_.minCoeff() < -1e-12)
        throw std::runtime_error("FpeSolver: negative density " +
                                 std::to_string(next_.minCoeff()) + ", scheme error");
    density.values = next_;
}

StationaryResult solve_stationary(const FpeSolver& solver, GridDensity initial, double tol,
                                  int max_steps, int monitor_stride) {
    if (!(tol > 0)) throw std::invalid_argument("solve_stationary: tol must be > 0");
    if (max_steps < 1) throw std::invalid_argument("solve_stationary: max_steps must be >= 1");
    if (monitor_stride <= 0)
        monitor_stride = std::max(1, static_cast<int>(std::llround(0.1 / solver.dt())));

    measures::ConvergenceMonitor monitor(tol);
    monitor.push(initial);
    StationaryResult out{std::move(initial), 0, 0.0, {}, {}};
    while (out.steps < max_steps) {
        for (int k = 0; k < monitor_stride && out.steps < max_steps; ++k) {
            solver.step(out.density);
            ++out.steps;
        }
        out.final_residual = monitor.push(out.density);
        out.residual_series.emplace_back(out.steps, out.final_residual);
        if (out.final_residual < tol) {
            out.converged_at_step = out.steps;
            return out;
        }
    }
    throw std::runtime_error("solve_stationary: no convergence after " +
                             std::to_string(out.steps) + " steps, residual " +
                             std::to_string(out.final_residual) + " above tol " +
                             std::to_string(tol));
}

GridDensity discretize_measure(const sde::InitialMeasure& m, const GridSpec& grid) {
    if (m.dim() != 2) throw std::invalid_argument("discretize_measure: need a 2-D measure");
    GridDensity d(grid);
    using Kind = sde::InitialMeasure::Kind;
    switch (m.kind) {
        case Kind::dirac: {
            if (!grid.contains(m.a(0), m.a(1)))
                throw std::invalid_argument("discretize_measure: point outside the grid");
            const int i = std::min(grid.nx - 1, static_cast<int>((m.a(0) - grid.x_min) / grid.hx()));
            const int j = std::min(grid.ny - 1, static_cast<int>((m.a(1) - grid.y_min) / grid.hy()));
            d.values(i, j) = 1.0;
            break;
        }
        case Kind::gaussian: {
            const Eigen::Matrix2d inv = Eigen::Matrix2d(m.cov).inverse();
            for (int i = 0; i < grid.nx; ++i)
                for (int j = 0; j < grid.ny; ++j) {
                    Eigen::Vector2d z(grid.cx(i) - m.a(0), grid.cy(j) - m.a(1));
                    d.values(i, j) = std::exp(-0.5 * z.dot(inv * z));
                }
            break;
        }
        case Kind::uniform_box: {
            for (int i = 0; i < grid.nx; ++i)
                for (int j = 0; j < grid.ny; ++j)
                    d.values(i, j) = (grid.cx(i) >= m.a(0) && grid.cx(i) <= m.b(0) &&
                                      grid.cy(j) >= m.a(1) && grid.cy(j) <= m.b(1))
                                         ? 1.0
                                         : 0.0;
            break;
        }
        case Kind::uniform_ball: {
            const double r2 = m.radius * m.radius;
            for (int i = 0; i < grid.nx; ++i)
                for (int j = 0; j < grid.ny; ++j) {
                    Eigen::Vector2d z(grid.cx(i) - m.a(0), grid.cy(j) - m.a(1));
                    d.values(i, j) = z.squaredNorm() <= r2 ? 1.0 : 0.0;
                }
            break;
        }
    }
    d.normalize();
    return d;
}

bool grid_covers(const GridSpec& grid, const std::vector<fields::Vec>& equilibria, double omega,
                 double c_hat) {
    if (!(c_hat > 0)) return false;
    const double margin = 4.0 * omega / std::sqrt(2.0 * c_hat);
    for (const auto& e : equilibria) {
        if (e.size() != 2) throw std::invalid_argument("grid_covers: equilibria must be 2-D");
        if (e(0) - margin < grid.x_min || e(0) + margin > grid.x_max ||
            e(1) - margin < grid.y_min || e(1) + margin > grid.y_max)
            return false;
    }
    return true;
}

SurfaceQuadrature make_surface_quadrature(const Eigen::Vector2d& center, double radius,
                                          int n_nodes) {
    if (!(radius > 0)) throw std::invalid_argument("make_surface_quadrature: radius must be > 0");
    if (n_nodes < 4) throw std::invalid_argument("make_surface_quadrature: need >= 4 nodes");
    SurfaceQuadrature q;
    q.center = center;
    q.radius = radius;
    q.n_nodes = n_nodes;
    q.nodes.resize(2, n_nodes);
    q.normals.resize(2, n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
        const double th = 2.0 * M_PI * k / n_nodes;
        q.normals.col(k) << std::cos(th), std::sin(th);
        q.nodes.col(k) = center + radius * q.normals.col(k);
    }
    q.node_weight = 2.0 * M_PI * radius / n_nodes;
    return q;
}

double surface_integral(const SurfaceQuadrature& q,
                        const std::function<double(const Eigen::Vector2d&,
                                                   const Eigen::Vector2d&)>& integrand) {
    double s = 0.0;
    for (int k = 0; k < q.n_nodes; ++k) s += integrand(q.nodes.col(k), q.normals.col(k));
    return s * q.node_weight;
}

double surface_integral(const GridDensity& values, const SurfaceQuadrature& q) {
    const GridSpec& g = values.grid;
    if (q.center(0) - q.radius < g.x_min || q.center(0) + q.radius > g.x_max ||
        q.center(1) - q.radius < g.y_min || q.center(1) + q.radius > g.y_max)
        throw std::invalid_argument("surface_integral: circle extends beyond the grid");
    return surface_integral(q, [&](const Eigen::Vector2d& x, const Eigen::Vector2d&) {
        return values.interpolate(x(0), x(1));
    });
}

double surface_flux(const SurfaceQuadrature& q,
                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field) {
    return surface_integral(
        q, [&](const Eigen::Vector2d& x, const Eigen::Vector2d& n) { return field(x).dot(n); });
}

TwoSidedReport lemma_tr_two_sided(
    const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& A,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v,
    const SurfaceQuadrature& q, double fd_step) {
    const double h = fd_step;
    auto row_div = [&](const Eigen::Vector2d& x) {
        Eigen::Vector2d out = Eigen::Vector2d::Zero();
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            out += (A(xp).col(j) - A(xm).col(j)) / (2.0 * h);
        }
        // (div A)_i = sum_j d_j A_ij: accumulate columns of dA/dx_j
        return out;
    };
    auto jac_v = [&](const Eigen::Vector2d& x) {
        Eigen::Matrix2d J;
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            J.col(j) = (v(xp) - v(xm)) / (2.0 * h);
        }
        return J;
    };
    TwoSidedReport rep;
    rep.lhs = surface_integral(q, [&](const Eigen::Vector2d& x, const Eigen::Vector2d&) {
        return row_div(x).dot(v(x));
    });
    rep.rhs = -surface_integral(q, [&](const Eigen::Vector2d& x, const Eigen::Vector2d&) {
        return (A(x).array() * jac_v(x).array()).sum();
    });
    rep.gap = std::abs(rep.lhs - rep.rhs);
    return rep;
}

}  // namespace driftlab::fpe
