#include "driftlab/fields.hpp"

namespace driftlab::fields {

Mat TestFunction::hessian_or_fd(double t, const Vec& x) const {
    if (hessian) return hessian(t, x);
    if (!gradient) throw std::invalid_argument("TestFunction: gradient required");
    const int d = static_cast<int>(x.size());
    Mat H(d, d);
    Vec xp = x, xm = x;
    for (int j = 0; j < d; ++j) {
        xp(j) = x(j) + fd_step;
        xm(j) = x(j) - fd_step;
        H.col(j) = (gradient(t, xp) - gradient(t, xm)) / (2.0 * fd_step);
        xp(j) = x(j);
        xm(j) = x(j);
    }
    // symmetrize away finite-difference asymmetry
    return 0.5 * (H + H.transpose());
}

TestFunction squared_norm_observable(int dim) {
    TestFunction h;
    h.value = [](double, const Vec& x) { return x.squaredNorm(); };
    h.gradient = [](double, const Vec& x) { return Vec(2.0 * x); };
    h.hessian = [dim](double, const Vec&) { return Mat(2.0 * Mat::Identity(dim, dim)); };
    return h;
}

double eval_generator(const DriftField& f, const DiffusionField& G,
                      const TestFunction& h, double t, const Vec& x) {
    if (!h.value || !h.gradient)
        throw std::invalid_argument("eval_generator: observable needs value and gradient");
    if (f.dim() != G.dim_state())
        throw std::invalid_argument("eval_generator: drift dim " + std::to_string(f.dim()) +
                                    " != diffusion state dim " + std::to_string(G.dim_state()));
    const Vec grad = h.gradient(t, x);
    const Mat H = h.hessian_or_fd(t, x);
    const Mat g = G(t, x);
    const double dt_term = h.time_derivative ? h.time_derivative(t, x) : 0.0;
    const double drift_term = grad.dot(f(t, x));
    const double diff_term = 0.5 * (g.transpose() * H * g).trace();
    return dt_term + drift_term + diff_term;
}

DriftField zero_drift(int dim) {
    DriftConstants c;
    c.one_sided_lipschitz = 0.0;
    c.lipschitz = 0.0;
    c.sublinearity = 0.0;
    return DriftField("zero", dim,
                      [](double, const Vec&, Vec& out) { out.setZero(); }, c);
}

DiffusionField isotropic_diffusion(double omega, int dim) {
    if (omega < 0.0) throw std::invalid_argument("isotropic_diffusion: omega must be >= 0");
    DiffusionConstants c;
    c.squared_lipschitz = 0.0;
    c.lipschitz = 0.0;
    c.frobenius_sup = omega * std::sqrt(static_cast<double>(dim));
    c.sublinearity = omega * omega * dim;
    c.isotropic_amplitude = omega;
    return DiffusionField(
        "constant_isotropic_diffusion", dim, dim,
        [omega](double, const Vec&, Mat& out) {
            out.setZero();
            out.diagonal().setConstant(omega);
        },
        c);
}

}  // namespace driftlab::fields
