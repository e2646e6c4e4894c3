#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/fields.hpp"

// Sampled estimation of the regularity constants the decay statements consume:
// one-sided Lipschitz rates (global and ball-partitioned), diffusion Lipschitz
// constants in both conventions, equilibria with stability, and local
// contraction balls around stable equilibria.
namespace driftlab::contraction {

using fields::DiffusionField;
using fields::DriftField;
using fields::Mat;
using fields::Vec;

struct Box {
    Vec lo, hi;

    Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size() || lo.size() == 0 || ((hi - lo).array() <= 0).any())
            throw std::invalid_argument("Box: need hi > lo on every axis");
    }
    int dim() const { return static_cast<int>(lo.size()); }
};

enum class Classification { globally_contracting, br_contracting, unclassified };

// sup over sampled pairs of (f(x)-f(y), x-y)/|x-y|^2, tight and signed: a
// negative value certifies sampled contraction at rate -estimate. Sampling
// mixes box-independent pairs, small-separation perturbation pairs, and the
// symmetric-part spectral abscissa of finite-difference Jacobians (the
// vanishing-separation limit, exact for linear fields).
struct ContractionReport {
    double global_rate_estimate = 0.0;
    Box region;
    int n_pairs = 0;
    Classification classification = Classification::unclassified;
    std::optional<double> c;       // contraction rate outside the ball (or everywhere)
    std::optional<double> lambda;  // expansion bound for pairs touching the ball
    std::optional<double> r;       // exclusion-ball radius
    std::optional<double> rate_outside;
    std::optional<double> rate_inside;
};

struct DiffusionEstimate {
    double squared_convention = 0.0;  // sup |dG|_F^2 / |dx|^2
    double plain = 0.0;               // sup |dG|_F / |dx|
    double frobenius_sup = 0.0;       // sup |G|_F over sampled points
};

struct EquilibriumRecord {
    Vec x_star;
    bool stable = false;
    double jacobian_spectrum_abscissa = 0.0;
    std::optional<double> r_star;  // filled by local_contraction_ball
    std::optional<double> c_star;
};

struct EquilibriaResult {
    std::vector<EquilibriumRecord> records;  // sorted lexicographically by coordinates
    std::string warning;                     // non-empty when no start converged
};

struct LocalBall {
    bool contracting = false;
    double r_star = 0.0;
    double c_star = 0.0;
};

struct ExclusionBall {
    Vec center;
    double radius = 0.0;
};

// Requires n_pairs >= 100. With an exclusion ball the sup is partitioned into
// pairs with both points outside (rate_outside) and the rest (rate_inside);
// classification follows the sign of the relevant sup. Autonomous evaluation
// at t = 0.
ContractionReport estimate_one_sided_rate(const DriftField& f, const Box& region, int n_pairs,
                                          std::uint64_t seed,
                                          const std::optional<ExclusionBall>& exclusion = {});

DiffusionEstimate estimate_diffusion_constants(const DiffusionField& G, const Box& region,
                                               int n_pairs, std::uint64_t seed);

// Multi-start damped Newton with finite-difference Jacobians (step 1e-6),
// roots deduplicated within 1e-6 and kept only inside the region. Stability
// from the Jacobian spectral abscissa.
EquilibriaResult find_equilibria(const DriftField& f, const Box& region, int n_starts,
                                 double root_tol = 1e-10, std::uint64_t seed = 0);

// Largest radius on a dyadic grid below r_max such that all sampled pairs in
// B_r(x_star) contract; c_star is the sampled rate at that radius. x_star must
// satisfy |f(x_star)| <= equilibrium_tol.
LocalBall local_contraction_ball(const DriftField& f, const Vec& x_star, double r_max,
                                 int n_pairs, std::uint64_t seed,
                                 double equilibrium_tol = 1e-8);

// Finite-difference Jacobian of an autonomous drift at x (central, step h).
Mat fd_jacobian(const DriftField& f, const Vec& x, double h = 1e-6);

}  // namespace driftlab::contraction
