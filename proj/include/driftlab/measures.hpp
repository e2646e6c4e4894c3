#pragma once
#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Grid densities, kernel density estimation, Wasserstein-2 distances between
// empirical measures, and convergence monitoring of density snapshots.
namespace driftlab::measures {

// Cell-centered rectangular grid: nx * ny cells, cell (i,j) centered at
// (x_min + (i+0.5)hx, y_min + (j+0.5)hy).
struct GridSpec {
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    int nx = 0, ny = 0;

    GridSpec() = default;
    GridSpec(double x_min_, double x_max_, double y_min_, double y_max_, int nx_, int ny_);

    double hx() const { return (x_max - x_min) / nx; }
    double hy() const { return (y_max - y_min) / ny; }
    double cell_area() const { return hx() * hy(); }
    double cx(int i) const { return x_min + (i + 0.5) * hx(); }
    double cy(int j) const { return y_min + (j + 0.5) * hy(); }
    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    bool same_as(const GridSpec& o) const {
        return x_min == o.x_min && x_max == o.x_max && y_min == o.y_min &&
               y_max == o.y_max && nx == o.nx && ny == o.ny;
    }
};

// Probability density sampled at cell centers; mass() = sum * cell_area.
struct GridDensity {
    GridSpec grid;
    Eigen::MatrixXd values;  // nx x ny

    GridDensity() = default;
    explicit GridDensity(const GridSpec& g) : grid(g), values(Eigen::MatrixXd::Zero(g.nx, g.ny)) {}

    double mass() const { return values.sum() * grid.cell_area(); }
    void normalize();
    // bilinear interpolation between cell centers (clamped at the rim)
    double interpolate(double x, double y) const;
};

struct KdeResult {
    GridDensity density;   // renormalized to unit mass on the grid
    double grid_mass = 0;  // mass of the raw mixture captured by the grid
    double escaped_mass = 0;  // analytic estimate of mass beyond the grid
    bool escape_warning = false;  // a particle sits > 5 kernel sigmas off-grid
};

// Gaussian-kernel density of a 2 x N point cloud on the grid. kernel_cov must
// be positive definite; the escaped-mass estimate is exact (erf product) for
// diagonal kernels and falls back to the grid-integral complement otherwise.
KdeResult kde_grid(const Eigen::MatrixXd& points, const Eigen::Matrix2d& kernel_cov,
                   const GridSpec& grid);

enum class W2Method { exact_assignment, entropic, sliced };

struct W2Options {
    int max_exact_points = 1024;    // subsample cap for the assignment solver
    std::uint64_t seed = 0;         // subsampling / projection seed
    double epsilon = 0.0;           // entropic regularization; 0 = 0.01 * median cost
    double marginal_tol = 1e-9;     // entropic stopping criterion (L1 marginal error)
    int max_iterations = 20000;     // entropic iteration cap
    int n_projections = 256;        // sliced directions
};

struct W2Result {
    double value = 0;     // the distance estimate (not squared)
    W2Method method = W2Method::exact_assignment;
    int n_used = 0;       // points per side after subsampling
    double epsilon = 0;   // entropic regularization actually used
    int iterations = 0;
    double marginal_residual = 0;
};

struct SinkhornError : std::runtime_error {
    double marginal_residual;
    SinkhornError(const std::string& msg, double residual)
        : std::runtime_error(msg), marginal_residual(residual) {}
};

// W2 between the empirical measures of two d x N point clouds.
// exact_assignment: both clouds deterministically subsampled to the same
// n <= max_exact_points, then an optimal assignment under squared distances.
// entropic: log-domain Sinkhorn, plan rounded to the feasible polytope, so the
// reported value upper-bounds the exact one and decreases with epsilon.
// sliced: mean over random 1-D projections; cheap proxy on a different scale
// (a pure translation v yields |v|/sqrt(2) in d = 2), not used for bounds.
W2Result wasserstein2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      W2Method method = W2Method::exact_assignment,
                      const W2Options& opts = {});

// L2 norm of the per-cell mass change between consecutive snapshots,
// |(values_{k+1} - values_k) * cell_area|_2. converged_at is the index of the
// first push whose norm fell below threshold.
class ConvergenceMonitor {
  public:
    explicit ConvergenceMonitor(double threshold) : threshold_(threshold) {
        if (threshold <= 0) throw std::invalid_argument("ConvergenceMonitor: threshold must be > 0");
    }
    // returns the norm against the previous snapshot, NaN for the first push
    double push(const GridDensity& snapshot);
    const std::vector<double>& series() const { return series_; }
    std::optional<int> converged_at() const { return converged_at_; }
    bool converged() const { return converged_at_.has_value(); }

  private:
    double threshold_;
    std::optional<GridDensity> prev_;
    std::vector<double> series_;
    std::optional<int> converged_at_;
};

// Mass of the ball B_r(center) under a grid density (cells whose center lies
// inside) or a 2 x N / d x N particle cloud (exact membership fraction).
// A ball entirely outside the grid yields 0 with a warning on stderr.
double mass_in_ball(const GridDensity& d, const Eigen::Vector2d& center, double radius);
double mass_in_ball(const Eigen::MatrixXd& points, const Eigen::VectorXd& center, double radius);

// Local maxima of a grid density (strictly greater than the 8-neighborhood),
// pruned to cells holding at least min_fraction of the peak value.
std::vector<std::pair<int, int>> local_maxima(const GridDensity& d, double min_fraction = 1e-3);

}  // namespace driftlab::measures
