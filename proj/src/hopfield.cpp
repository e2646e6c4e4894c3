#include "driftlab/hopfield.hpp"

#include <cmath>

namespace driftlab::hopfield {

namespace {
// overflow-safe log(cosh(y))
double log_cosh(double y) {
    const double a = std::abs(y);
    return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}
}  // namespace

HopfieldModel make_hopfield(const Eigen::Vector2d& u, double beta) {
    if (!(u(0) >= 0) || !(u(1) >= 0) || !std::isfinite(u(0)) || !std::isfinite(u(1)))
        throw std::invalid_argument("make_hopfield: input gains must be non-negative and finite");
    if (!(beta > 0) || !std::isfinite(beta))
        throw std::invalid_argument("make_hopfield: beta must be positive and finite");
    HopfieldModel m;
    m.beta = beta;
    m.u = u;
    Eigen::Matrix2d M;
    M << 1, 1, 1, -1;
    m.W_u = M * u.asDiagonal() * M.transpose() / 2.0;
    m.globally_contracting = beta * u.maxCoeff() < 1.0;
    return m;
}

fields::DriftField HopfieldModel::drift_field() const {
    fields::DriftConstants c;
    const double bu = beta * u.maxCoeff();
    c.one_sided_lipschitz = bu - 1.0;
    c.lipschitz = 1.0 + bu;
    c.sublinearity = std::max(2.0, 4.0 * u.maxCoeff() * u.maxCoeff());
    if (globally_contracting) c.contraction_rate = 1.0 - bu;
    HopfieldModel self = *this;
    return fields::DriftField(
        "hopfield", 2,
        [self](double, const fields::Vec& x, fields::Vec& out) {
            out = self.drift(Eigen::Vector2d(x(0), x(1)));
        },
        c);
}

double EnergyLandscape::energy(const Eigen::Vector2d& x) const {
    const Eigen::Vector2d p = model.phi(x);
    const double b = model.beta;
    return -0.5 * p.dot(model.W_u * p) + x.dot(p) -
           (log_cosh(b * x(0)) + log_cosh(b * x(1))) / b;
}

// dE/dx_k = -phi'_k(x) f_k(x); the x^T Phi and log cosh terms cancel to this
Eigen::Vector2d EnergyLandscape::gradient(const Eigen::Vector2d& x) const {
    const Eigen::Vector2d j = model.jphi_diag(x);
    const Eigen::Vector2d f = model.drift(x);
    return -(j.array() * f.array()).matrix();
}

double equilibrium_gamma(double u_i, double beta, double tol) {
    if (!(u_i >= 0) || !(beta > 0))
        throw std::invalid_argument("equilibrium_gamma: need u_i >= 0 and beta > 0");
    if (u_i * beta <= 1.0) return 0.0;
    auto g = [&](double x) { return u_i * std::tanh(beta * x) - x; };
    // g > 0 just right of 0, g(u_i) < 0: bisect, then Newton polish
    double lo = tol, hi = u_i;
    for (int it = 0; it < 200 && hi - lo > 0.25 * tol * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double t = std::tanh(beta * x);
        const double dg = u_i * beta * (1.0 - t * t) - 1.0;
        if (std::abs(dg) < 1e-300) break;
        x -= (u_i * t - x) / dg;
    }
    return x;
}

std::vector<Eigen::Vector2d> named_equilibria(const HopfieldModel& m) {
    std::vector<Eigen::Vector2d> out;
    out.emplace_back(0.0, 0.0);
    const double g1 = equilibrium_gamma(m.u(0), m.beta);
    const double g2 = equilibrium_gamma(m.u(1), m.beta);
    if (g1 > 0) {
        out.emplace_back(g1, g1);
        out.emplace_back(-g1, -g1);
    }
    if (g2 > 0) {
        out.emplace_back(g2, -g2);
        out.emplace_back(-g2, g2);
    }
    return out;
}

double drift_metric_residual(const HopfieldModel& m,
                             const std::vector<Eigen::Vector2d>& points) {
    EnergyLandscape land{m};
    double worst = 0.0;
    for (const auto& x : points) {
        const Eigen::Vector2d pg =
            (m.metric_diag(x).array() * land.gradient(x).array()).matrix();
        worst = std::max(worst, (m.drift(x) + pg).norm());
    }
    return worst;
}

Thm2HypothesisCheck check_thm2_hypotheses(const EnergyLandscape& l,
                                          const Eigen::Vector2d& x_a,
                                          const Eigen::Vector2d& x_b, double r,
                                          const measures::GridDensity& stationary,
                                          double omega, int n_angles,
                                          double in_support_fraction) {
    if (!(r > 0)) throw std::invalid_argument("check_thm2_hypotheses: radius must be > 0");
    if (n_angles < 8) throw std::invalid_argument("check_thm2_hypotheses: need >= 8 angles");

    Thm2HypothesisCheck out;
    const double e_b = l.energy(x_b);
    double max_a = l.energy(x_a);
    double min_b = e_b, max_b = e_b;
    bool orthant = x_a(0) != 0 && x_a(1) != 0 && x_b(0) != 0 && x_b(1) != 0;
    for (int k = 0; k < n_angles && true; ++k) {
        const double th = 2.0 * M_PI * k / n_angles;
        const Eigen::Vector2d z(r * std::cos(th), r * std::sin(th));
        const Eigen::Vector2d pa = x_a + z, pb = x_b + z;
        if (orthant)
            orthant = pa(0) * x_a(0) > 0 && pa(1) * x_a(1) > 0 && pb(0) * x_b(0) > 0 &&
                      pb(1) * x_b(1) > 0;
        max_a = std::max(max_a, l.energy(pa));
        const double eb = l.energy(pb);
        min_b = std::min(min_b, eb);
        max_b = std::max(max_b, eb);
    }
    out.orthant_ok = orthant;
    out.boundary_energy_max_a = max_a;
    out.boundary_energy_min_b = min_b;
    out.boundary_energy_max_b = max_b;
    out.energy_order_ok = max_a <= e_b && e_b <= min_b && max_a < 0 && max_b < 0;

    // (III) residual of grad(mu) = -P grad(E) mu on in-support interior cells,
    // gradients by central differences on the grid
    const auto& g = stationary.grid;
    const double mu_max = stationary.values.maxCoeff();
    const double cut = in_support_fraction * mu_max;
    const double half_d = 0.5 * omega * omega;
    double worst_raw = 0.0, worst_flux = 0.0, flux_scale = 0.0;
    for (int i = 1; i + 1 < g.nx; ++i) {
        for (int j = 1; j + 1 < g.ny; ++j) {
            const double mu = stationary.values(i, j);
            if (mu < cut) continue;
            const Eigen::Vector2d x(g.cx(i), g.cy(j));
            Eigen::Vector2d grad_mu(
                (stationary.values(i + 1, j) - stationary.values(i - 1, j)) / (2 * g.hx()),
                (stationary.values(i, j + 1) - stationary.values(i, j - 1)) / (2 * g.hy()));
            const Eigen::Vector2d pge =
                (l.model.metric_diag(x).array() * l.gradient(x).array()).matrix() * mu;
            worst_raw = std::max(worst_raw, (grad_mu + pge).norm());
            worst_flux = std::max(worst_flux, (half_d * grad_mu + pge).norm());
            flux_scale = std::max({flux_scale, half_d * grad_mu.norm(), pge.norm()});
        }
    }
    out.iii_residual = worst_raw / mu_max;
    out.iii_flux_residual = flux_scale > 0 ? worst_flux / flux_scale : 0.0;
    return out;
}

}  // namespace driftlab::hopfield
