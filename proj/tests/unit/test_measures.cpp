#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "driftlab/measures.hpp"

using namespace driftlab;
using measures::GridDensity;
using measures::GridSpec;
using measures::W2Method;
using measures::W2Options;

namespace {

Eigen::MatrixXd random_cloud(int n, std::uint64_t seed, double scale = 1.0,
                             const Eigen::Vector2d& mean = Eigen::Vector2d::Zero()) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd pts(2, n);
    for (int i = 0; i < n; ++i) {
        pts(0, i) = mean(0) + scale * nd(gen);
        pts(1, i) = mean(1) + scale * nd(gen);
    }
    return pts;
}

double w2_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return measures::wasserstein2(a, b).value;
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("grid spec validates bounds and resolution") {
    CHECK_THROWS_AS(GridSpec(1.0, -1.0, 0.0, 1.0, 8, 8), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(0.0, 1.0, 0.0, 1.0, 1, 8), std::invalid_argument);
    const GridSpec g(-2.0, 2.0, -1.0, 3.0, 8, 16);
    CHECK(g.hx() == doctest::Approx(0.5));
    CHECK(g.hy() == doctest::Approx(0.25));
    CHECK(g.cx(0) == doctest::Approx(-1.75));
    CHECK(g.cy(15) == doctest::Approx(2.875));
    CHECK(g.contains(0.0, 0.0));
    CHECK_FALSE(g.contains(0.0, 3.5));
}

TEST_CASE("translating a cloud moves it by exactly the translation norm") {
    const auto a = random_cloud(100, 42);
    const Eigen::Vector2d v(0.6, -0.8);
    const Eigen::MatrixXd b = a.colwise() + v;
    CHECK(w2_exact(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance between single points is the euclidean distance") {
    Eigen::MatrixXd a(2, 1), b(2, 1);
    a << 0, 0;
    b << 3, 4;
    const auto res = measures::wasserstein2(a, b);
    CHECK(res.value == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(res.n_used == 1);
}

TEST_CASE("exact distance is symmetric and satisfies the triangle inequality") {
    for (int k = 0; k < 50; ++k) {
        const auto a = random_cloud(24, 100 + k, 1.0, {0.0, 0.0});
        const auto b = random_cloud(24, 200 + k, 0.7, {1.0, -0.5});
        const auto c = random_cloud(24, 300 + k, 1.3, {-0.5, 0.5});
        const double ab = w2_exact(a, b), ba = w2_exact(b, a);
        const double bc = w2_exact(b, c), ac = w2_exact(a, c);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("sampled gaussian clouds reproduce the closed-form distance") {
    // equal covariances, so the distance reduces to the mean separation
    const auto a = random_cloud(1500, 7, 0.2, {0.0, 0.0});
    const auto b = random_cloud(1500, 8, 0.2, {1.0, 0.0});
    CHECK(w2_exact(a, b) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("subsampling is capped, deterministic, and echoed in the result") {
    const auto a = random_cloud(2000, 1);
    const auto b = random_cloud(2000, 2, 0.8, {0.5, 0.0});
    W2Options opts;
    opts.max_exact_points = 256;
    opts.seed = 7;
    const auto r1 = measures::wasserstein2(a, b, W2Method::exact_assignment, opts);
    const auto r2 = measures::wasserstein2(a, b, W2Method::exact_assignment, opts);
    CHECK(r1.n_used == 256);
    CHECK(r1.value == r2.value);
}

TEST_CASE("mismatched or empty clouds are rejected") {
    Eigen::MatrixXd a(2, 5), c(3, 5);
    a.setZero();
    c.setZero();
    CHECK_THROWS_AS(measures::wasserstein2(a, c), std::invalid_argument);
    Eigen::MatrixXd e(2, 0);
    CHECK_THROWS_AS(measures::wasserstein2(a, e), std::invalid_argument);
}

TEST_CASE("entropic estimate upper-bounds the exact one and tightens with epsilon") {
    const auto a = random_cloud(128, 11);
    const auto b = random_cloud(128, 12, 0.8, {1.0, 0.0});
    const double exact = w2_exact(a, b);
    W2Options opts;
    opts.marginal_tol = 1e-7;
    double prev = 1e100;
    for (const double eps : {2.0, 0.5, 0.1}) {
        opts.epsilon = eps;
        const auto res = measures::wasserstein2(a, b, W2Method::entropic, opts);
        CHECK(res.value >= exact - 1e-9);
        CHECK(res.value <= prev + 1e-10);
        CHECK(res.epsilon == eps);
        CHECK(res.iterations > 0);
        CHECK(res.marginal_residual < 1e-7);
        prev = res.value;
    }
    CHECK(prev <= 1.1 * exact);
}

TEST_CASE("entropic solver reports the marginal residual when starved") {
    const auto a = random_cloud(64, 21);
    const auto b = random_cloud(64, 22, 1.0, {2.0, 0.0});
    W2Options opts;
    opts.epsilon = 0.05;
    opts.marginal_tol = 1e-15;
    opts.max_iterations = 3;
    try {
        measures::wasserstein2(a, b, W2Method::entropic, opts);
        FAIL("expected SinkhornError");
    } catch (const measures::SinkhornError& e) {
        CHECK(e.marginal_residual > 0.0);
        CHECK(std::string(e.what()).find("marginal") != std::string::npos);
    }
}

TEST_CASE("sliced distance sees a translation at the projected scale") {
    const auto a = random_cloud(400, 31);
    const Eigen::Vector2d v(1.0, 1.0);
    const Eigen::MatrixXd b = a.colwise() + v;
    const auto res = measures::wasserstein2(a, b, W2Method::sliced);
    // |v| = sqrt(2) projects to |v|/sqrt(2) = 1 on average
    CHECK(res.value == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("kde mass splits into grid and escaped parts that sum to one") {
    const auto pts = random_cloud(500, 41, 0.6);
    const GridSpec grid(-2.5, 2.5, -2.5, 2.5, 64, 64);
    Eigen::Matrix2d cov = 0.5 * Eigen::Matrix2d::Identity();
    const auto res = measures::kde_grid(pts, cov, grid);
    CHECK(std::abs(res.grid_mass + res.escaped_mass - 1.0) < 1e-4);
    CHECK(res.density.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(res.escape_warning);
}

TEST_CASE("kde of a symmetric cloud is symmetric under point reflection") {
    Eigen::MatrixXd pts(2, 2);
    pts << 1.0, -1.0, 0.5, -0.5;
    const GridSpec grid(-3, 3, -3, 3, 32, 32);
    Eigen::Matrix2d cov = 0.4 * Eigen::Matrix2d::Identity();
    const auto res = measures::kde_grid(pts, cov, grid);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j)
            CHECK(res.density.values(i, j) ==
                  doctest::Approx(res.density.values(31 - i, 31 - j)).epsilon(1e-12));
}

TEST_CASE("kde of one particle peaks at its cell and captures nearly all mass") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 0.0;
    const GridSpec grid(-2, 2, -2, 2, 65, 65);
    Eigen::Matrix2d cov = 0.25 * Eigen::Matrix2d::Identity();
    const auto res = measures::kde_grid(pts, cov, grid);
    Eigen::Index pi, pj;
    res.density.values.maxCoeff(&pi, &pj);
    CHECK(pi == 32);
    CHECK(pj == 32);
    CHECK(res.grid_mass > 0.999);
    CHECK(res.escaped_mass < 1e-3);
}

TEST_CASE("kde flags particles far off the grid as escaped") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0.0, 100.0, 0.0, 100.0;
    const GridSpec grid(-2.5, 2.5, -2.5, 2.5, 32, 32);
    Eigen::Matrix2d cov = 0.25 * Eigen::Matrix2d::Identity();
    const auto res = measures::kde_grid(pts, cov, grid);
    CHECK(res.escape_warning);
    CHECK(res.escaped_mass == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("kde rejects bad inputs") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 0.0;
    const GridSpec grid(-1, 1, -1, 1, 8, 8);
    Eigen::Matrix2d bad;
    bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(measures::kde_grid(pts, bad, grid), std::invalid_argument);
    Eigen::MatrixXd wrong(3, 1);
    wrong.setZero();
    CHECK_THROWS_AS(
        measures::kde_grid(wrong, Eigen::Matrix2d::Identity(), grid), std::invalid_argument);
    Eigen::MatrixXd empty(2, 0);
    CHECK_THROWS_AS(
        measures::kde_grid(empty, Eigen::Matrix2d::Identity(), grid), std::invalid_argument);
}

TEST_CASE("convergence monitor tracks the change norm between snapshots") {
    CHECK_THROWS_AS(measures::ConvergenceMonitor(-1.0), std::invalid_argument);
    measures::ConvergenceMonitor mon(1e-3);
    const GridSpec grid(-1, 1, -1, 1, 4, 4);
    GridDensity d(grid);
    d.values.setConstant(0.25);  // unit mass on [-1,1]^2

    CHECK(std::isnan(mon.push(d)));
    CHECK_FALSE(mon.converged());

    GridDensity d2 = d;
    d2.values(0, 0) += 1.0;
    const double delta = mon.push(d2);
    CHECK(delta == doctest::Approx(grid.cell_area()).epsilon(1e-12));
    CHECK_FALSE(mon.converged());

    // the series records deltas only, so the NaN first push is not an entry
    CHECK(mon.push(d2) == 0.0);
    REQUIRE(mon.converged());
    CHECK(*mon.converged_at() == 1);
    CHECK(mon.series().size() == 2);

    GridDensity other(GridSpec(-2, 2, -2, 2, 4, 4));
    CHECK_THROWS_AS(mon.push(other), std::invalid_argument);
}

TEST_CASE("ball mass agrees between the density and particle views") {
    const auto pts = random_cloud(4000, 51, 0.6);
    const GridSpec grid(-3, 3, -3, 3, 96, 96);
    Eigen::Matrix2d cov = 0.05 * Eigen::Matrix2d::Identity();
    const auto kde = measures::kde_grid(pts, cov, grid);

    const Eigen::Vector2d center(0.0, 0.0);
    const double from_grid = measures::mass_in_ball(kde.density, center, 1.0);
    const double from_points = measures::mass_in_ball(pts, center, 1.0);
    CHECK(std::abs(from_grid - from_points) < 0.06);

    // a ball covering the whole grid captures all (normalized) mass
    CHECK(measures::mass_in_ball(kde.density, center, 20.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(measures::mass_in_ball(pts, center, 100.0) == 1.0);

    // entirely outside: zero, and invalid radii are rejected
    CHECK(measures::mass_in_ball(kde.density, {50.0, 0.0}, 1.0) == 0.0);
    CHECK_THROWS_AS(measures::mass_in_ball(kde.density, center, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(measures::mass_in_ball(pts, center, -1.0), std::invalid_argument);
}

TEST_CASE("local maxima finds separated bumps and prunes shallow ones") {
    const GridSpec grid(-1, 1, -1, 1, 40, 40);
    GridDensity d(grid);
    auto bump = [&](int ci, int cj, double h) {
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j)
                d.values(i, j) += h * std::exp(-0.1 * ((i - ci) * (i - ci) + (j - cj) * (j - cj)));
    };
    bump(10, 10, 1.0);
    bump(30, 30, 0.4);

    const auto peaks = measures::local_maxima(d);
    REQUIRE(peaks.size() == 2);
    const auto has = [&](int i, int j) {
        for (const auto& p : peaks)
            if (p.first == i && p.second == j) return true;
        return false;
    };
    CHECK(has(10, 10));
    CHECK(has(30, 30));

    const auto tall = measures::local_maxima(d, 0.6);
    REQUIRE(tall.size() == 1);
    CHECK(tall[0].first == 10);
}

}  // TEST_SUITE
