#include "driftlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "driftlab/assignment.hpp"
#include "driftlab/rng.hpp"

namespace driftlab::measures {

GridSpec::GridSpec(double x_min_, double x_max_, double y_min_, double y_max_, int nx_, int ny_)
    : x_min(x_min_), x_max(x_max_), y_min(y_min_), y_max(y_max_), nx(nx_), ny(ny_) {
    if (!(x_max > x_min) || !(y_max > y_min))
        throw std::invalid_argument("GridSpec: bounds must satisfy max > min");
    if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec: need at least 2 cells per axis");
}

void GridDensity::normalize() {
    const double m = mass();
    if (!(m > 0)) throw std::invalid_argument("GridDensity: cannot normalize zero mass");
    values /= m;
}

double GridDensity::interpolate(double x, double y) const {
    const double hx = grid.hx(), hy = grid.hy();
    // position in cell-center coordinates, clamped to the center lattice
    double u = (x - grid.x_min) / hx - 0.5;
    double v = (y - grid.y_min) / hy - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(grid.nx - 1));
    v = std::clamp(v, 0.0, static_cast<double>(grid.ny - 1));
    const int i0 = std::min(static_cast<int>(u), grid.nx - 2);
    const int j0 = std::min(static_cast<int>(v), grid.ny - 2);
    const double fu = u - i0, fv = v - j0;
    return values(i0, j0) * (1 - fu) * (1 - fv) + values(i0 + 1, j0) * fu * (1 - fv) +
           values(i0, j0 + 1) * (1 - fu) * fv + values(i0 + 1, j0 + 1) * fu * fv;
}

KdeResult kde_grid(const Eigen::MatrixXd& points, const Eigen::Matrix2d& kernel_cov,
                   const GridSpec& grid) {
    if (points.rows() != 2) throw std::invalid_argument("kde_grid: points must be 2 x N");
    const int N = static_cast<int>(points.cols());
    if (N == 0) throw std::invalid_argument("kde_grid: empty point cloud");

    Eigen::LLT<Eigen::Matrix2d> llt(kernel_cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("kde_grid: kernel covariance must be positive definite");
    const Eigen::Matrix2d inv = kernel_cov.inverse();
    const double norm_const = 1.0 / (2.0 * M_PI * std::sqrt(kernel_cov.determinant()));
    const bool diagonal = std::abs(kernel_cov(0, 1)) < 1e-14 * kernel_cov.trace();
    const double sx = std::sqrt(kernel_cov(0, 0)), sy = std::sqrt(kernel_cov(1, 1));

    KdeResult res;
    res.density = GridDensity(grid);
    Eigen::MatrixXd& vals = res.density.values;

    double inside_analytic = 0.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int p = 0; p < N; ++p) {
        const double px = points(0, p), py = points(1, p);
        if (px < grid.x_min - 5 * sx || px > grid.x_max + 5 * sx || py < grid.y_min - 5 * sy ||
            py > grid.y_max + 5 * sy)
            res.escape_warning = true;
        if (diagonal) {
            const double mx = 0.5 * (std::erf((grid.x_max - px) / sx * inv_sqrt2) -
                                     std::erf((grid.x_min - px) / sx * inv_sqrt2));
            const double my = 0.5 * (std::erf((grid.y_max - py) / sy * inv_sqrt2) -
                                     std::erf((grid.y_min - py) / sy * inv_sqrt2));
            inside_analytic += mx * my;
        }
    }

    for (int i = 0; i < grid.nx; ++i) {
        const double cx = grid.cx(i);
        for (int j = 0; j < grid.ny; ++j) {
            const double cy = grid.cy(j);
            double s = 0.0;
            for (int p = 0; p < N; ++p) {
                const double dx = cx - points(0, p), dy = cy - points(1, p);
                const double q =
                    inv(0, 0) * dx * dx + 2.0 * inv(0, 1) * dx * dy + inv(1, 1) * dy * dy;
                s += std::exp(-0.5 * q);
            }
            vals(i, j) = s * norm_const / N;
        }
    }

    res.grid_mass = res.density.mass();
    res.escaped_mass = diagonal ? 1.0 - inside_analytic / N : 1.0 - res.grid_mass;
    res.density.normalize();
    return res;
}

namespace {

// deterministic subsample of k column indices out of N (partial Fisher-Yates)
std::vector<int> subsample_indices(int N, int k, std::uint64_t seed, std::uint64_t stream) {
    std::vector<int> idx(N);
    for (int i = 0; i < N; ++i) idx[i] = i;
    const auto key = rng::derive(seed, rng::Purpose::subsample);
    for (int i = 0; i < k; ++i) {
        const std::uint64_t w = rng::word(key, stream, static_cast<std::uint64_t>(i), 0);
        const int j = i + static_cast<int>(w % static_cast<std::uint64_t>(N - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(m.rows(), static_cast<int>(idx.size()));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i) out.col(i) = m.col(idx[i]);
    return out;
}

Eigen::MatrixXd squared_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd na = a.colwise().squaredNorm();
    const Eigen::VectorXd nb = b.colwise().squaredNorm();
    Eigen::MatrixXd c = -2.0 * a.transpose() * b;
    c.colwise() += na;
    c.rowwise() += nb.transpose();
    return c.cwiseMax(0.0);
}

W2Result w2_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const W2Options& opts) {
    const int n = std::min({static_cast<int>(a.cols()), static_cast<int>(b.cols()),
                            opts.max_exact_points});
    const Eigen::MatrixXd sa =
        (a.cols() == n) ? a : take_columns(a, subsample_indices(static_cast<int>(a.cols()), n, opts.seed, 0));
    const Eigen::MatrixXd sb =
        (b.cols() == n) ? b : take_columns(b, subsample_indices(static_cast<int>(b.cols()), n, opts.seed, 1));
    const Eigen::MatrixXd cost = squared_distance_matrix(sa, sb);
    const AssignmentResult asg = solve_assignment(cost);
    W2Result r;
    r.method = W2Method::exact_assignment;
    r.n_used = n;
    r.value = std::sqrt(std::max(0.0, asg.cost / n));
    return r;
}

W2Result w2_entropic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const W2Options& opts) {
    const int n = std::min(static_cast<int>(a.cols()), opts.max_exact_points);
    const int m = std::min(static_cast<int>(b.cols()), opts.max_exact_points);
    const Eigen::MatrixXd sa =
        (a.cols() == n) ? a : take_columns(a, subsample_indices(static_cast<int>(a.cols()), n, opts.seed, 0));
    const Eigen::MatrixXd sb =
        (b.cols() == m) ? b : take_columns(b, subsample_indices(static_cast<int>(b.cols()), m, opts.seed, 1));
    const Eigen::MatrixXd C = squared_distance_matrix(sa, sb);

    double eps = opts.epsilon;
    if (eps <= 0) {
        std::vector<double> flat(C.data(), C.data() + C.size());
        std::nth_element(flat.begin(), flat.begin() + flat.size() / 2, flat.end());
        eps = 0.01 * flat[flat.size() / 2];
        if (!(eps > 0)) eps = 1e-6;  // coincident clouds
    }

    const double la = -std::log(static_cast<double>(n));
    const double lb = -std::log(static_cast<double>(m));
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);

    auto lse_rows = [&](Eigen::VectorXd& out) {
        // out_i = eps * log sum_j exp((g_j - C_ij)/eps)
        for (int i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) mx = std::max(mx, (g(j) - C(i, j)) / eps);
            double s = 0;
            for (int j = 0; j < m; ++j) s += std::exp((g(j) - C(i, j)) / eps - mx);
            out(i) = eps * (mx + std::log(s));
        }
    };
    auto lse_cols = [&](Eigen::VectorXd& out) {
        for (int j = 0; j < m; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) mx = std::max(mx, (f(i) - C(i, j)) / eps);
            double s = 0;
            for (int i = 0; i < n; ++i) s += std::exp((f(i) - C(i, j)) / eps - mx);
            out(j) = eps * (mx + std::log(s));
        }
    };

    auto plan = [&]() {
        Eigen::MatrixXd P(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                P(i, j) = std::exp((f(i) + g(j) - C(i, j)) / eps + la + lb);
        return P;
    };

    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    Eigen::VectorXd tmp_n(n), tmp_m(m);
    for (; it < opts.max_iterations; ++it) {
        lse_rows(tmp_n);
        f = -eps * lb * Eigen::VectorXd::Ones(n) - tmp_n;  // row marginal = 1/n exactly
        lse_cols(tmp_m);
        g = -eps * la * Eigen::VectorXd::Ones(m) - tmp_m;
        if (it % 5 == 4 || it == opts.max_iterations - 1) {
            const Eigen::MatrixXd P = plan();
            residual = (P.rowwise().sum() - Eigen::VectorXd::Constant(n, 1.0 / n)).lpNorm<1>() +
                       (P.colwise().sum().transpose() - Eigen::VectorXd::Constant(m, 1.0 / m)).lpNorm<1>();
            if (residual < opts.marginal_tol) break;
        }
    }
    if (residual >= opts.marginal_tol && it >= opts.max_iterations - 1)
        throw SinkhornError("entropic transport did not reach marginal tolerance " +
                                std::to_string(opts.marginal_tol) + " (residual " +
                                std::to_string(residual) + " after " +
                                std::to_string(opts.max_iterations) + " iterations)",
                            residual);

    // round the near-feasible plan onto the transport polytope so the cost is
    // a genuine feasible value (never below the exact optimum)
    Eigen::MatrixXd P = plan();
    const Eigen::VectorXd ra = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::VectorXd rb = Eigen::VectorXd::Constant(m, 1.0 / m);
    for (int i = 0; i < n; ++i) {
        const double s = P.row(i).sum();
        if (s > ra(i)) P.row(i) *= ra(i) / s;
    }
    for (int j = 0; j < m; ++j) {
        const double s = P.col(j).sum();
        if (s > rb(j)) P.col(j) *= rb(j) / s;
    }
    const Eigen::VectorXd err_r = ra - P.rowwise().sum();
    const Eigen::VectorXd err_c = rb - P.colwise().sum().transpose();
    const double def = err_r.sum();
    if (def > 1e-300) P += (err_r * err_c.transpose()) / def;

    W2Result r;
    r.method = W2Method::entropic;
    r.n_used = n;
    r.epsilon = eps;
    r.iterations = it + 1;
    r.marginal_residual = residual;
    r.value = std::sqrt(std::max(0.0, (P.array() * C.array()).sum()));
    return r;
}

W2Result w2_sliced(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const W2Options& opts) {
    const int d = static_cast<int>(a.rows());
    const int n = std::min({static_cast<int>(a.cols()), static_cast<int>(b.cols()),
                            opts.max_exact_points});
    const Eigen::MatrixXd sa =
        (a.cols() == n) ? a : take_columns(a, subsample_indices(static_cast<int>(a.cols()), n, opts.seed, 0));
    const Eigen::MatrixXd sb =
        (b.cols() == n) ? b : take_columns(b, subsample_indices(static_cast<int>(b.cols()), n, opts.seed, 1));
    const auto key = rng::derive(opts.seed, rng::Purpose::projections);
    double acc = 0.0;
    std::vector<double> pa(n), pb(n);
    for (int l = 0; l < opts.n_projections; ++l) {
        Eigen::VectorXd theta(d);
        for (int k = 0; k < d; ++k)
            theta(k) = rng::normal(key, static_cast<std::uint64_t>(l), 0, static_cast<std::uint64_t>(k));
        theta.normalize();
        for (int i = 0; i < n; ++i) {
            pa[i] = theta.dot(sa.col(i));
            pb[i] = theta.dot(sb.col(i));
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double s = 0;
        for (int i = 0; i < n; ++i) s += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        acc += s / n;
    }
    W2Result r;
    r.method = W2Method::sliced;
    r.n_used = n;
    r.value = std::sqrt(acc / opts.n_projections);
    return r;
}

}  // namespace

W2Result wasserstein2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, W2Method method,
                      const W2Options& opts) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("wasserstein2: point clouds have different dimensions (" +
                                    std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
    if (a.cols() == 0 || b.cols() == 0)
        throw std::invalid_argument("wasserstein2: empty point cloud");
    switch (method) {
        case W2Method::exact_assignment: return w2_exact(a, b, opts);
        case W2Method::entropic: return w2_entropic(a, b, opts);
        case W2Method::sliced: return w2_sliced(a, b, opts);
    }
    throw std::logic_error("wasserstein2: unknown method");
}

double ConvergenceMonitor::push(const GridDensity& snapshot) {
    double norm = std::numeric_limits<double>::quiet_NaN();
    if (prev_) {
        if (!prev_->grid.same_as(snapshot.grid))
            throw std::invalid_argument("ConvergenceMonitor: snapshot grid changed between pushes");
        norm = (snapshot.values - prev_->values).norm() * snapshot.grid.cell_area();
        series_.push_back(norm);
        if (!converged_at_ && norm < threshold_)
            converged_at_ = static_cast<int>(series_.size()) - 1;
    }
    prev_ = snapshot;
    return norm;
}

double mass_in_ball(const GridDensity& d, const Eigen::Vector2d& center, double radius) {
    if (radius <= 0) throw std::invalid_argument("mass_in_ball: radius must be > 0");
    const GridSpec& g = d.grid;
    if (center(0) + radius < g.x_min || center(0) - radius > g.x_max ||
        center(1) + radius < g.y_min || center(1) - radius > g.y_max) {
        std::cerr << "mass_in_ball: ball lies entirely outside the grid, mass is 0\n";
        return 0.0;
    }
    const double r2 = radius * radius;
    double s = 0;
    for (int i = 0; i < g.nx; ++i) {
        const double dx = g.cx(i) - center(0);
        if (dx * dx > r2) continue;
        for (int j = 0; j < g.ny; ++j) {
            const double dy = g.cy(j) - center(1);
            if (dx * dx + dy * dy <= r2) s += d.values(i, j);
        }
    }
    return s * g.cell_area();
}

double mass_in_ball(const Eigen::MatrixXd& points, const Eigen::VectorXd& center, double radius) {
    if (radius <= 0) throw std::invalid_argument("mass_in_ball: radius must be > 0");
    if (points.rows() != center.size())
        throw std::invalid_argument("mass_in_ball: center dimension mismatch");
    const double r2 = radius * radius;
    int count = 0;
    for (int i = 0; i < points.cols(); ++i)
        if ((points.col(i) - center).squaredNorm() <= r2) ++count;
    return static_cast<double>(count) / static_cast<double>(points.cols());
}

std::vector<std::pair<int, int>> local_maxima(const GridDensity& d, double min_fraction) {
    // candidates dominate their 8-neighborhood non-strictly; exact ties form
    // plateaus (symmetric densities on even grids), so 8-connected candidate
    // clusters collapse to their lexicographically first cell
    const double floor = d.values.maxCoeff() * min_fraction;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> cand(d.grid.nx, d.grid.ny);
    cand.setConstant(false);
    for (int i = 1; i + 1 < d.grid.nx; ++i) {
        for (int j = 1; j + 1 < d.grid.ny; ++j) {
            const double v = d.values(i, j);
            if (v < floor) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (d.values(i + di, j + dj) > v) {
                        is_max = false;
                        break;
                    }
                }
            cand(i, j) = is_max;
        }
    }

    std::vector<std::pair<int, int>> out;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen = cand;
    seen.setConstant(false);
    std::vector<std::pair<int, int>> stack;
    for (int i = 1; i + 1 < d.grid.nx; ++i) {
        for (int j = 1; j + 1 < d.grid.ny; ++j) {
            if (!cand(i, j) || seen(i, j)) continue;
            out.emplace_back(i, j);
            stack.assign(1, {i, j});
            seen(i, j) = true;
            while (!stack.empty()) {
                const auto [ci, cj] = stack.back();
                stack.pop_back();
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int ni = ci + di, nj = cj + dj;
                        if (ni < 0 || nj < 0 || ni >= d.grid.nx || nj >= d.grid.ny) continue;
                        if (!cand(ni, nj) || seen(ni, nj)) continue;
                        seen(ni, nj) = true;
                        stack.emplace_back(ni, nj);
                    }
            }
        }
    }
    return out;
}

}  // namespace driftlab::measures
