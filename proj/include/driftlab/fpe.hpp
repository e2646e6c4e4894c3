#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "driftlab/fields.hpp"
#include "driftlab/measures.hpp"
#include "driftlab/sde.hpp"

// Conservative explicit finite-volume solver for the 2-D forward (Fokker-
// Planck) equation with diagonal diffusion and zero-flux boundaries, plus the
// circle quadratures used by the mass-sink and concentration checks.
//
// Face fluxes use exponential upwinding (Scharfetter-Gummel): the advective
// part upwinds and the diffusive part stays centered, blended through the
// face Peclet number. Per-face detailed balance makes discretized gradient
// stationary densities exact fixed points for linear drifts, and all flux
// coefficients are non-negative, so densities stay positive under the dt
// bound and total mass telescopes to a constant.
namespace driftlab::fpe {

using measures::GridDensity;
using measures::GridSpec;

struct FpeProblem {
    fields::DriftField drift;
    fields::DiffusionField diffusion;  // constant isotropic or spatially diagonal
    GridSpec grid;
    double dt = 0.0;  // <= 0 requests the solver's stable step size
};

class FpeSolver {
  public:
    // Validates diagonal diffusion on the grid and enforces the stability
    // bounds dt <= min(cell^2/(2 max D), cell/max|f|) and dt * max outflow
    // coefficient <= 1; dt <= 0 selects 0.9x the tighter bound.
    explicit FpeSolver(FpeProblem p);

    const FpeProblem& problem() const { return problem_; }
    double dt() const { return dt_; }
    double cfl_bound() const { return cfl_bound_; }
    double positivity_bound() const { return positivity_bound_; }

    // One conservative step; throws if the result dips below -1e-12.
    void step(GridDensity& density) const;

  private:
    FpeProblem problem_;
    double dt_ = 0.0;
    double cfl_bound_ = 0.0;
    double positivity_bound_ = 0.0;
    // flux through an x-face is ax*mu_left - bx*mu_right, likewise in y;
    // boundary faces carry zero coefficients
    Eigen::MatrixXd ax_, bx_;  // (nx+1) x ny
    Eigen::MatrixXd ay_, by_;  // nx x (ny+1)
    mutable Eigen::MatrixXd jx_, jy_, next_;
};

struct StationaryResult {
    GridDensity density;
    int steps = 0;
    double final_residual = 0.0;
    std::optional<int> converged_at_step;
    std::vector<std::pair<int, double>> residual_series;  // (step, residual)
};

// Iterates until the area-weighted l2 difference between consecutive
// monitored snapshots drops below tol. monitor_stride <= 0 monitors every
// ~0.1 time units. Throws (with the final residual) if max_steps is exceeded.
StationaryResult solve_stationary(const FpeSolver& solver, GridDensity initial, double tol,
                                  int max_steps, int monitor_stride = 0);

// Cell-center discretization of an initial distribution, normalized to mass 1.
GridDensity discretize_measure(const sde::InitialMeasure& m, const GridSpec& grid);

// True when every equilibrium sits at least 4 stationary standard deviations
// (omega/sqrt(2c)) away from all grid edges.
bool grid_covers(const GridSpec& grid, const std::vector<fields::Vec>& equilibria, double omega,
                 double c_hat);

// Equally weighted nodes on a circle; weights sum to 2*pi*radius.
struct SurfaceQuadrature {
    Eigen::Vector2d center;
    double radius = 0.0;
    int n_nodes = 0;
    Eigen::Matrix2Xd nodes;
    Eigen::Matrix2Xd normals;  // (node - center)/radius
    double node_weight = 0.0;
};

SurfaceQuadrature make_surface_quadrature(const Eigen::Vector2d& center, double radius,
                                          int n_nodes);

// Pointwise integrand over (node, outward normal), trapezoid-equivalent on
// the uniform circle partition.
double surface_integral(const SurfaceQuadrature& q,
                        const std::function<double(const Eigen::Vector2d&,
                                                   const Eigen::Vector2d&)>& integrand);

// Scalar grid function restricted to the circle (bilinear interpolation).
// The circle must lie inside the grid.
double surface_integral(const GridDensity& values, const SurfaceQuadrature& q);

// Flux of a vector field against the outward normal.
double surface_flux(const SurfaceQuadrature& q,
                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field);

struct TwoSidedReport {
    double lhs = 0.0;  // circle integral of (row-divergence of A, v)
    double rhs = 0.0;  // negative circle integral of A : Jacobian(v)
    double gap = 0.0;  // |lhs - rhs|, reported, never asserted
};

// Evaluates both sides of the boundary-integral identity relating
// div(A) against v to the contraction of A with the Jacobian of v.
// Derivatives by central differences (step fd_step). No pass/fail claim.
TwoSidedReport lemma_tr_two_sided(
    const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& A,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v,
    const SurfaceQuadrature& q, double fd_step = 1e-6);

}  // namespace driftlab::fpe
