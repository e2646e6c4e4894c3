#pragma once
#include <Eigen/Dense>
#include <optional>

#include "driftlab/fields.hpp"
#include "driftlab/measures.hpp"

// Input-driven two-neuron Hopfield system: x' = -x + W_u * Phi(x) with
// Phi(x) = (tanh(beta x_1), tanh(beta x_2)) and input-modulated coupling
// W_u = M diag(u) M^T / 2 for M = [1 1; 1 -1], i.e. the columns of M/sqrt(2)
// are the orthonormal eigenvectors of W_u with eigenvalues u_1, u_2. Under
// this normalization the on-axis equilibria are gamma_i * M^i with
// gamma = u_i tanh(beta gamma), and global contraction holds iff
// max(u) < 1/beta with rate 1 - beta*max(u).
namespace driftlab::hopfield {

using fields::Mat;
using fields::Vec;

struct HopfieldModel {
    double beta = 0.0;
    Eigen::Vector2d u;
    Eigen::Matrix2d W_u;
    bool globally_contracting = false;

    Eigen::Vector2d phi(const Eigen::Vector2d& x) const {
        return {std::tanh(beta * x(0)), std::tanh(beta * x(1))};
    }
    // J_Phi = diag(beta sech^2(beta x_i)), positive definite everywhere
    Eigen::Vector2d jphi_diag(const Eigen::Vector2d& x) const {
        const Eigen::Vector2d p = phi(x);
        return {beta * (1.0 - p(0) * p(0)), beta * (1.0 - p(1) * p(1))};
    }
    Eigen::Vector2d drift(const Eigen::Vector2d& x) const { return -x + W_u * phi(x); }
    Eigen::Matrix2d jacobian(const Eigen::Vector2d& x) const {
        return -Eigen::Matrix2d::Identity() + W_u * jphi_diag(x).asDiagonal();
    }
    // metric matrix P(x) = J_Phi(x)^{-1}, diagonal and positive
    Eigen::Vector2d metric_diag(const Eigen::Vector2d& x) const {
        const Eigen::Vector2d j = jphi_diag(x);
        return {1.0 / j(0), 1.0 / j(1)};
    }

    fields::DriftField drift_field() const;
};

// Energy whose metric gradient flow reproduces the drift: f == -P grad E.
struct EnergyLandscape {
    HopfieldModel model;

    double energy(const Eigen::Vector2d& x) const;
    Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;  // analytic
};

// u entries and beta must be positive and finite.
HopfieldModel make_hopfield(const Eigen::Vector2d& u, double beta);

// Largest solution of gamma = u_i tanh(beta gamma); 0 when u_i*beta <= 1.
double equilibrium_gamma(double u_i, double beta, double tol = 1e-14);

// The named equilibria on the eigenvector axes: origin always, plus
// +-gamma_1 (1,1) and +-gamma_2 (1,-1) in the multistable regime.
std::vector<Eigen::Vector2d> named_equilibria(const HopfieldModel& m);

// max_i |f(x_i) + P(x_i) grad E(x_i)| over the supplied points
double drift_metric_residual(const HopfieldModel& m,
                             const std::vector<Eigen::Vector2d>& points);

struct Thm2HypothesisCheck {
    bool orthant_ok = false;
    bool energy_order_ok = false;
    double iii_residual = 0.0;        // max |grad mu + P grad E mu| / max mu
    double iii_flux_residual = 0.0;   // same with the omega^2/2 diffusion scale, relative
    double boundary_energy_max_a = 0.0;
    double boundary_energy_min_b = 0.0;
    double boundary_energy_max_b = 0.0;
};

// Checks the concentration hypotheses for centers x_a (deep) and x_b (shallow)
// at radius r against a stationary grid density:
//  (I) both balls stay inside their center's open orthant (boundary sampling);
//  (II) max_{|z|=r} E(x_a+z) <= E(x_b) <= min_{|z|=r} E(x_b+z), all < 0;
//  (III) reported as a residual, never gated: the identity grad mu = -P grad E mu
//  over cells holding at least in_support_fraction of the peak density.
Thm2HypothesisCheck check_thm2_hypotheses(const EnergyLandscape& l,
                                          const Eigen::Vector2d& x_a,
                                          const Eigen::Vector2d& x_b, double r,
                                          const measures::GridDensity& stationary,
                                          double omega,
                                          int n_angles = 2048,
                                          double in_support_fraction = 1e-4);

}  // namespace driftlab::hopfield
