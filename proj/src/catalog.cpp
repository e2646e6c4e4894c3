#include <algorithm>
#include <cmath>

#include "driftlab/fields.hpp"
#include "driftlab/hopfield.hpp"

namespace driftlab::fields {

namespace {

const char* kDriftNames[] = {"ou_linear", "double_well_gradient", "hopfield_global",
                             "hopfield_multistable"};
const char* kDiffusionNames[] = {"paper_inhomogeneous_diffusion", "constant_isotropic_diffusion"};

std::string all_names() {
    std::string s;
    for (const char* n : kDriftNames) s += std::string(n) + ", ";
    for (const char* n : kDiffusionNames) s += std::string(n) + ", ";
    s.resize(s.size() - 2);
    return s;
}

bool contains(const char* const* arr, std::size_t n, const std::string& name) {
    return std::find_if(arr, arr + n, [&](const char* s) { return name == s; }) != arr + n;
}

// consumes keys from a copy of the param map; leftovers are an error
class ParamReader {
  public:
    ParamReader(std::string entry, const Params& p) : entry_(std::move(entry)), params_(p) {}

    double take(const std::string& key, double fallback) {
        auto it = params_.find(key);
        if (it == params_.end()) return fallback;
        const double v = it->second;
        params_.erase(it);
        return v;
    }

    double require(const std::string& key) {
        auto it = params_.find(key);
        if (it == params_.end())
            throw std::invalid_argument("catalog entry '" + entry_ + "' requires parameter '" +
                                        key + "'");
        const double v = it->second;
        params_.erase(it);
        return v;
    }

    int take_dim(double fallback, int max_dim = 64) {
        const double v = take("d", fallback);
        const int d = static_cast<int>(v);
        if (v != d || d < 1 || d > max_dim)
            throw std::invalid_argument("catalog entry '" + entry_ +
                                        "': parameter 'd' must be an integer in [1, " +
                                        std::to_string(max_dim) + "]");
        return d;
    }

    void finish() const {
        if (params_.empty()) return;
        std::string keys;
        for (const auto& [k, v] : params_) keys += "'" + k + "' ";
        throw std::invalid_argument("catalog entry '" + entry_ + "': unknown parameter(s) " + keys);
    }

  private:
    std::string entry_;
    Params params_;
};

DriftField make_ou_linear(const Params& p) {
    ParamReader r("ou_linear", p);
    const double c = r.require("c");
    const int d = r.take_dim(2);
    r.finish();
    DriftConstants k;
    k.one_sided_lipschitz = -c;
    k.lipschitz = std::abs(c);
    k.sublinearity = c * c;
    if (c > 0) k.contraction_rate = c;
    return DriftField(
        "ou_linear", d, [c](double, const Vec& x, Vec& out) { out = -c * x; }, k);
}

// gradient descent on E(x) = a (x1^2 - 1)^2 + tilt x1 (+ ky x2^2 / 2 in 2-D)
DriftField make_double_well(const Params& p) {
    ParamReader r("double_well_gradient", p);
    const double a = r.take("a", 0.25);
    const double tilt = r.take("tilt", 0.0);
    const double ky = r.take("ky", 0.5);
    const int d = r.take_dim(2, 2);
    r.finish();
    if (!(a > 0)) throw std::invalid_argument("double_well_gradient: 'a' must be > 0");
    DriftConstants k;
    k.one_sided_lipschitz = 4.0 * a;  // sup of -E'' along x1, attained at the origin
    k.expansion_rate = 4.0 * a;
    k.expansion_radius = 1.0 / std::sqrt(3.0);
    return DriftField(
        "double_well_gradient", d,
        [a, tilt, ky, d](double, const Vec& x, Vec& out) {
            out(0) = -4.0 * a * x(0) * (x(0) * x(0) - 1.0) - tilt;
            if (d == 2) out(1) = -ky * x(1);
        },
        k);
}

DriftField make_hopfield_entry(const std::string& entry, const Params& p, double u1_def,
                               double u2_def) {
    ParamReader r(entry, p);
    const double beta = r.take("beta", 2.0);
    const double u1 = r.take("u1", u1_def);
    const double u2 = r.take("u2", u2_def);
    r.finish();
    auto m = hopfield::make_hopfield(Eigen::Vector2d(u1, u2), beta);
    return m.drift_field();
}

DiffusionField make_trig_diagonal(const Params& p) {
    ParamReader r("paper_inhomogeneous_diffusion", p);
    const double a = r.require("a");
    r.finish();
    if (!(a > 0)) throw std::invalid_argument("paper_inhomogeneous_diffusion: 'a' must be > 0");
    DiffusionConstants k;
    k.squared_lipschitz = a * a;
    k.lipschitz = a;
    k.frobenius_sup = a * std::sqrt(2.0);
    k.sublinearity = 2.0 * a * a;
    return DiffusionField(
        "paper_inhomogeneous_diffusion", 2, 2,
        [a](double, const Vec& x, Mat& out) {
            out.setZero();
            out(0, 0) = a * std::sin(x(0));
            out(1, 1) = a * std::cos(x(1));
        },
        k);
}

DiffusionField make_constant_isotropic(const Params& p) {
    ParamReader r("constant_isotropic_diffusion", p);
    // "ω" is accepted as an alias for "omega"
    const double omega = p.count("\xcf\x89") ? r.take("\xcf\x89", 0.0) : r.require("omega");
    const int d = r.take_dim(2);
    r.finish();
    return isotropic_diffusion(omega, d);
}

}  // namespace

DriftField catalog_drift(const std::string& name, const Params& params) {
    if (name == "ou_linear") return make_ou_linear(params);
    if (name == "double_well_gradient") return make_double_well(params);
    if (name == "hopfield_global") return make_hopfield_entry(name, params, 0.2, 0.25);
    if (name == "hopfield_multistable") return make_hopfield_entry(name, params, 1.0, 3.0);
    throw std::invalid_argument("unknown drift catalog entry '" + name + "'; available: " +
                                all_names());
}

DiffusionField catalog_diffusion(const std::string& name, const Params& params) {
    if (name == "paper_inhomogeneous_diffusion") return make_trig_diagonal(params);
    if (name == "constant_isotropic_diffusion") return make_constant_isotropic(params);
    throw std::invalid_argument("unknown diffusion catalog entry '" + name + "'; available: " +
                                all_names());
}

bool is_catalog_drift(const std::string& name) {
    return contains(kDriftNames, std::size(kDriftNames), name);
}

bool is_catalog_diffusion(const std::string& name) {
    return contains(kDiffusionNames, std::size(kDiffusionNames), name);
}

std::pair<DriftField, DiffusionField> catalog_field(const std::string& name,
                                                    const Params& params) {
    if (contains(kDriftNames, std::size(kDriftNames), name)) {
        Params rest = params;
        double omega = 0.0;
        for (const char* key : {"omega", "\xcf\x89"})
            if (auto it = rest.find(key); it != rest.end()) {
                omega = it->second;
                rest.erase(it);
            }
        DriftField f = catalog_drift(name, rest);
        return {f, isotropic_diffusion(omega, f.dim())};
    }
    if (contains(kDiffusionNames, std::size(kDiffusionNames), name)) {
        DiffusionField g = catalog_diffusion(name, params);
        return {zero_drift(g.dim_state()), g};
    }
    throw std::invalid_argument("unknown catalog entry '" + name + "'; available: " + all_names());
}

}  // namespace driftlab::fields
