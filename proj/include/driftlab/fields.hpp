#pragma once
#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

// Drift and diffusion fields with their declared regularity constants, scalar
// test functions, and the generator of the associated diffusion process.
namespace driftlab::fields {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Constants a field certifies about itself. All are optional: a catalog entry
// declares only what is analytically known, and estimators must never measure
// a violation beyond their own tolerance.
struct DriftConstants {
    // tight one-sided bound: (f(t,x)-f(t,y), x-y) <= one_sided * |x-y|^2
    std::optional<double> one_sided_lipschitz;
    // plain norm bound: |f(t,x)-f(t,y)| <= lipschitz * |x-y|
    std::optional<double> lipschitz;
    // |f(t,x)|^2 <= sublinearity * (1 + |x|^2)
    std::optional<double> sublinearity;
    // c > 0 with (f(t,x)-f(t,y), x-y) <= -c |x-y|^2 for all pairs
    std::optional<double> contraction_rate;
    // expansion allowed inside a ball: rate bound and ball radius
    std::optional<double> expansion_rate;
    std::optional<double> expansion_radius;
};

struct DiffusionConstants {
    // |G(t,x)-G(t,y)|_F^2 <= squared_lipschitz * |x-y|^2  (the rate arithmetic convention)
    std::optional<double> squared_lipschitz;
    // |G(t,x)-G(t,y)|_F <= lipschitz * |x-y|
    std::optional<double> lipschitz;
    // sup_x |G(t,x)|_F
    std::optional<double> frobenius_sup;
    // |G(t,x)|_F^2 <= sublinearity * (1 + |x|^2)
    std::optional<double> sublinearity;
    // set iff G(t,x) == amplitude * I at every point
    std::optional<double> isotropic_amplitude;
};

class DriftField {
  public:
    using EvalInto = std::function<void(double, const Vec&, Vec&)>;

    DriftField() = default;
    DriftField(std::string name, int dim, EvalInto fn, DriftConstants constants = {},
               bool time_dependent = false)
        : name_(std::move(name)), dim_(dim), fn_(std::move(fn)),
          constants_(constants), time_dependent_(time_dependent) {
        if (dim_ <= 0) throw std::invalid_argument("DriftField: dim must be positive");
        if (!fn_) throw std::invalid_argument("DriftField: missing evaluation function");
    }

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    const DriftConstants& constants() const { return constants_; }
    bool time_dependent() const { return time_dependent_; }

    void eval_into(double t, const Vec& x, Vec& out) const {
        if (x.size() != dim_)
            throw std::invalid_argument("DriftField '" + name_ + "': state has dimension " +
                                        std::to_string(x.size()) + ", field expects " +
                                        std::to_string(dim_));
        out.resize(dim_);
        fn_(t, x, out);
    }

    Vec operator()(double t, const Vec& x) const {
        Vec out(dim_);
        eval_into(t, x, out);
        return out;
    }

  private:
    std::string name_;
    int dim_ = 0;
    EvalInto fn_;
    DriftConstants constants_;
    bool time_dependent_ = false;
};

class DiffusionField {
  public:
    using EvalInto = std::function<void(double, const Vec&, Mat&)>;

    DiffusionField() = default;
    DiffusionField(std::string name, int dim_state, int dim_noise, EvalInto fn,
                   DiffusionConstants constants = {}, bool time_dependent = false)
        : name_(std::move(name)), dim_state_(dim_state), dim_noise_(dim_noise),
          fn_(std::move(fn)), constants_(constants), time_dependent_(time_dependent) {
        if (dim_state_ <= 0 || dim_noise_ <= 0)
            throw std::invalid_argument("DiffusionField: dimensions must be positive");
        if (!fn_) throw std::invalid_argument("DiffusionField: missing evaluation function");
    }

    int dim_state() const { return dim_state_; }
    int dim_noise() const { return dim_noise_; }
    const std::string& name() const { return name_; }
    const DiffusionConstants& constants() const { return constants_; }
    bool time_dependent() const { return time_dependent_; }
    bool constant_isotropic() const { return constants_.isotropic_amplitude.has_value(); }

    void eval_into(double t, const Vec& x, Mat& out) const {
        if (x.size() != dim_state_)
            throw std::invalid_argument("DiffusionField '" + name_ + "': state has dimension " +
                                        std::to_string(x.size()) + ", field expects " +
                                        std::to_string(dim_state_));
        out.resize(dim_state_, dim_noise_);
        fn_(t, x, out);
    }

    Mat operator()(double t, const Vec& x) const {
        Mat out(dim_state_, dim_noise_);
        eval_into(t, x, out);
        return out;
    }

  private:
    std::string name_;
    int dim_state_ = 0, dim_noise_ = 0;
    EvalInto fn_;
    DiffusionConstants constants_;
    bool time_dependent_ = false;
};

// Scalar observable h(t,x) with the derivatives the generator needs.
// gradient is required; hessian falls back to central differences of the
// gradient (step fd_step); time_derivative defaults to zero (autonomous h).
struct TestFunction {
    std::function<double(double, const Vec&)> value;
    std::function<Vec(double, const Vec&)> gradient;
    std::function<Mat(double, const Vec&)> hessian;          // optional
    std::function<double(double, const Vec&)> time_derivative;  // optional
    double fd_step = 1e-5;

    Mat hessian_or_fd(double t, const Vec& x) const;
};

// h(x) = |x|^2, the workhorse observable for pair-difference decay.
TestFunction squared_norm_observable(int dim);

// Generator of dX = f dt + G dB applied to h:
//   A h = dh/dt + (grad h, f) + 1/2 Tr(G^T (hess h) G).
double eval_generator(const DriftField& f, const DiffusionField& G,
                      const TestFunction& h, double t, const Vec& x);

using Params = std::map<std::string, double>;

// Named field catalog. Drift entries accept an optional "omega" parameter
// giving the paired constant isotropic diffusion (omega = 0 when absent);
// diffusion entries pair with the zero drift of matching dimension.
std::pair<DriftField, DiffusionField> catalog_field(const std::string& name,
                                                    const Params& params);
DriftField catalog_drift(const std::string& name, const Params& params);
DiffusionField catalog_diffusion(const std::string& name, const Params& params);
bool is_catalog_drift(const std::string& name);
bool is_catalog_diffusion(const std::string& name);

// Constant isotropic helper used throughout the experiments.
DiffusionField isotropic_diffusion(double omega, int dim);
DriftField zero_drift(int dim);

}  // namespace driftlab::fields
