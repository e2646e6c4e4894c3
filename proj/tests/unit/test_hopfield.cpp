#include <doctest.h>

#include <cmath>
#include <random>

#include "driftlab/fpe.hpp"
#include "driftlab/hopfield.hpp"
#include "driftlab/measures.hpp"
#include "driftlab/sde.hpp"

using namespace driftlab;
using Eigen::Vector2d;

namespace {

hopfield::HopfieldModel multistable() { return hopfield::make_hopfield({1.0, 3.0}, 2.0); }

// frozen fixed points of gamma = u tanh(2 gamma)
constexpr double kGamma1 = 0.9575040240772691;
constexpr double kGamma2 = 2.9999631295150904;

}  // namespace

TEST_SUITE("hopfield") {

TEST_CASE("coupling matrix diagonalizes along the hadamard directions") {
    CHECK(hopfield::make_hopfield({1.0, 1.0}, 2.0).W_u.isApprox(Eigen::Matrix2d::Identity(), 1e-14));

    const auto m = multistable();
    Eigen::Matrix2d expect;
    expect << 2.0, -1.0, -1.0, 2.0;
    CHECK(m.W_u.isApprox(expect, 1e-14));
    // (1,1) and (1,-1) are eigenvectors with eigenvalues u1, u2
    CHECK((m.W_u * Vector2d(1, 1)).isApprox(Vector2d(1, 1), 1e-14));
    CHECK((m.W_u * Vector2d(1, -1)).isApprox(3.0 * Vector2d(1, -1), 1e-14));
}

TEST_CASE("model construction validates inputs and flags the contraction regime") {
    CHECK_THROWS_AS(hopfield::make_hopfield({-1.0, 1.0}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(hopfield::make_hopfield({1.0, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hopfield::make_hopfield({1.0, 1.0}, -2.0), std::invalid_argument);

    CHECK(hopfield::make_hopfield({0.2, 0.25}, 2.0).globally_contracting);
    CHECK_FALSE(multistable().globally_contracting);
}

TEST_CASE("gamma fixed points match the scalar equation to 1e-12") {
    CHECK(hopfield::equilibrium_gamma(0.2, 2.0) == 0.0);
    CHECK(hopfield::equilibrium_gamma(0.25, 2.0) == 0.0);

    const double g1 = hopfield::equilibrium_gamma(1.0, 2.0);
    const double g2 = hopfield::equilibrium_gamma(3.0, 2.0);
    CHECK(g1 == doctest::Approx(kGamma1).epsilon(1e-12));
    CHECK(g2 == doctest::Approx(kGamma2).epsilon(1e-12));
    CHECK(std::abs(g1 - 1.0 * std::tanh(2.0 * g1)) < 1e-12);
    CHECK(std::abs(g2 - 3.0 * std::tanh(2.0 * g2)) < 1e-12);
}

TEST_CASE("named equilibria are drift zeros in the expected order") {
    const auto m = multistable();
    const auto named = hopfield::named_equilibria(m);
    REQUIRE(named.size() == 5);
    CHECK(named[0].isZero());
    CHECK(named[1].isApprox(Vector2d(kGamma1, kGamma1), 1e-10));
    CHECK(named[2].isApprox(Vector2d(-kGamma1, -kGamma1), 1e-10));
    CHECK(named[3].isApprox(Vector2d(kGamma2, -kGamma2), 1e-10));
    CHECK(named[4].isApprox(Vector2d(-kGamma2, kGamma2), 1e-10));
    for (const auto& x : named) CHECK(m.drift(x).norm() < 1e-10);

    CHECK(hopfield::named_equilibria(hopfield::make_hopfield({0.2, 0.25}, 2.0)).size() == 1);
}

TEST_CASE("the drift is the metric gradient flow of the energy") {
    const auto m = multistable();
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ud(-4.0, 4.0);
    std::vector<Vector2d> pts(1000);
    for (auto& p : pts) p = Vector2d(ud(gen), ud(gen));
    CHECK(hopfield::drift_metric_residual(m, pts) < 1e-10);

    // metric diagonal at the origin is 1/beta
    CHECK(m.metric_diag(Vector2d::Zero())(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.metric_diag(Vector2d::Zero())(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("energy values, parity, and well ordering") {
    const hopfield::EnergyLandscape land{multistable()};
    const Vector2d deep(kGamma2, -kGamma2), shallow(kGamma1, kGamma1);
    const Vector2d saddle(1.252922229601, 0.454462008457);

    CHECK(land.energy(deep) == doctest::Approx(-2.3068589640866097).epsilon(1e-12));
    CHECK(land.energy(shallow) == doctest::Approx(-0.32652388742692384).epsilon(1e-12));
    CHECK(land.energy(Vector2d::Zero()) == 0.0);

    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const Vector2d x(ud(gen), ud(gen));
        CHECK(land.energy(x) == doctest::Approx(land.energy(-x)).epsilon(1e-13));
    }

    CHECK(land.energy(deep) < land.energy(shallow));
    CHECK(land.energy(shallow) < land.energy(saddle));
    CHECK(land.energy(saddle) < land.energy(Vector2d::Zero()));
}

TEST_CASE("analytic energy gradient matches central differences") {
    const hopfield::EnergyLandscape land{multistable()};
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const Vector2d x(ud(gen), ud(gen));
        const Vector2d g = land.gradient(x);
        for (int i = 0; i < 2; ++i) {
            Vector2d xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            const double fd = (land.energy(xp) - land.energy(xm)) / (2 * h);
            CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("concentration hypotheses hold at small radius and break as it grows") {
    const auto m = multistable();
    const hopfield::EnergyLandscape land{m};
    const Vector2d x_a(kGamma2, -kGamma2), x_b(kGamma1, kGamma1);

    // any positive density works for the reported residual
    const measures::GridSpec grid(-4.3, 4.3, -4.3, 4.3, 101, 101);
    const auto density = fpe::discretize_measure(
        sde::InitialMeasure::gaussian(fields::Vec::Zero(2), 4.0 * fields::Mat::Identity(2, 2)),
        grid);

    const auto ok = hopfield::check_thm2_hypotheses(land, x_a, x_b, 0.5, density, 0.5);
    CHECK(ok.orthant_ok);
    CHECK(ok.energy_order_ok);
    CHECK(ok.boundary_energy_max_a <= land.energy(x_b));
    CHECK(ok.boundary_energy_max_b < 0.0);
    CHECK(std::isfinite(ok.iii_residual));
    CHECK(ok.iii_residual >= 0.0);
    CHECK(std::isfinite(ok.iii_flux_residual));

    // at 0.8 the shallow ball crosses its saddle ridge: energy order fails
    const auto wide = hopfield::check_thm2_hypotheses(land, x_a, x_b, 0.8, density, 0.5);
    CHECK(wide.orthant_ok);
    CHECK_FALSE(wide.energy_order_ok);
    CHECK(wide.boundary_energy_min_b < land.energy(x_b));

    // at 1.0 the shallow ball also leaves the positive orthant
    const auto huge = hopfield::check_thm2_hypotheses(land, x_a, x_b, 1.0, density, 0.5);
    CHECK_FALSE(huge.orthant_ok);
}

}  // TEST_SUITE
