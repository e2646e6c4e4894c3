#include <doctest.h>

#include <cmath>

#include "driftlab/sde.hpp"

using namespace driftlab;
using fields::Mat;
using fields::Vec;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

const auto kOu = fields::catalog_drift("ou_linear", {{"c", 0.5}});
const auto kNoNoise = fields::isotropic_diffusion(0.0, 2);
const auto kNoise04 = fields::isotropic_diffusion(0.4, 2);

}  // namespace

TEST_SUITE("sde") {

TEST_CASE("step_em: one drift-only step of -0.5x lands on (0.995, 0)") {
    const Vec x1 = sde::step_em(v2(1.0, 0.0), kOu, kNoNoise, 0.0, 0.01, Vec::Zero(2));
    CHECK(x1(0) == doctest::Approx(0.995).epsilon(1e-15));
    CHECK(x1(1) == 0.0);
}

TEST_CASE("step_em applies the diffusion matrix to the given increment") {
    const auto G = fields::catalog_diffusion("paper_inhomogeneous_diffusion", {{"a", 0.4}});
    const Vec x = v2(M_PI / 2, 0.0);
    const Vec dW = v2(0.3, -0.2);
    const double dt = 0.01;
    const Vec got = sde::step_em(x, kOu, G, 0.0, dt, dW);
    const Vec want = x + dt * kOu(0.0, x) + G(0.0, x) * dW;
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("step_em reports divergence with a non-finite state") {
    const fields::DriftField blowup("cubic_blowup", 2, [](double, const Vec& x, Vec& out) {
        out = x.array().pow(3);
    });
    Vec x = v2(1e160, 0.0);
    CHECK_THROWS_AS(sde::step_em(x, blowup, kNoNoise, 0.0, 1.0, Vec::Zero(2)),
                    sde::DivergenceError);
}

TEST_CASE("simulate_path: grid layout and non-integral T/dt rejection") {
    const auto traj = sde::simulate_path(kOu, kNoise04, v2(1.0, -1.0), 0.5, 0.01, 42);
    REQUIRE(traj.times.size() == 51);
    REQUIRE(traj.states.size() == 51);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((traj.states.front() - v2(1.0, -1.0)).norm() == 0.0);
    CHECK(traj.dt == 0.01);
    CHECK(traj.seed == 42);
    CHECK_THROWS_AS(sde::simulate_path(kOu, kNoise04, v2(0, 0), 0.505, 0.01, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sde::simulate_path(kOu, kNoise04, v2(0, 0), -1.0, 0.01, 1),
                    std::invalid_argument);
}

TEST_CASE("identical seeds reproduce a path bit for bit") {
    const auto a = sde::simulate_path(kOu, kNoise04, v2(1, 1), 1.0, 0.01, 7);
    const auto b = sde::simulate_path(kOu, kNoise04, v2(1, 1), 1.0, 0.01, 7);
    const auto c = sde::simulate_path(kOu, kNoise04, v2(1, 1), 1.0, 0.01, 8);
    CHECK((a.states.back() - b.states.back()).norm() == 0.0);
    CHECK((a.states.back() - c.states.back()).norm() != 0.0);
}

TEST_CASE("coupled pair: shared noise cancels for constant isotropic diffusion") {
    const auto pair = sde::simulate_coupled_pair(kOu, kNoise04, v2(2, 0), v2(-1, 1), 1.0, 0.01, 3);
    const Vec d0 = v2(3, -1);
    for (std::size_t k = 0; k < pair.trajectory_x.states.size(); ++k) {
        const Vec dk = pair.trajectory_x.states[k] - pair.trajectory_z.states[k];
        const double expected = std::pow(1.0 - 0.5 * 0.01, static_cast<double>(k));
        CHECK((dk - expected * d0).norm() < 1e-16 * std::pow(2.0, static_cast<double>(k) / 50) +
                                                1e-13);
    }
}

TEST_CASE("initial measures sample inside their supports and reproduce by index") {
    const auto key = rng::derive(11, rng::Purpose::init);
    const auto ball = sde::InitialMeasure::uniform_ball(v2(1, 1), 0.5);
    const auto box = sde::InitialMeasure::uniform_box(v2(-1, 0), v2(1, 2));
    for (std::uint64_t i = 0; i < 200; ++i) {
        CHECK((ball.sample(key, i) - v2(1, 1)).norm() <= 0.5 + 1e-15);
        const Vec s = box.sample(key, i);
        CHECK(s(0) >= -1.0);
        CHECK(s(0) <= 1.0);
        CHECK(s(1) >= 0.0);
        CHECK(s(1) <= 2.0);
    }
    CHECK((ball.sample(key, 7) - ball.sample(key, 7)).norm() == 0.0);
    CHECK((ball.sample(key, 7) - ball.sample(key, 8)).norm() != 0.0);
    const auto point = sde::InitialMeasure::point_mass(v2(3, 4));
    CHECK((point.sample(key, 123) - v2(3, 4)).norm() == 0.0);
}

TEST_CASE("gaussian initial measure matches its first two moments") {
    Mat cov(2, 2);
    cov << 0.5, 0.2, 0.2, 0.3;
    const auto g = sde::InitialMeasure::gaussian(v2(1, -1), cov);
    const auto e = sde::make_ensemble(g, 20000, 5);
    const Vec mean = e.particles.rowwise().mean();
    CHECK(mean(0) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(mean(1) == doctest::Approx(-1.0).epsilon(0.02));
    const Mat centered = e.particles.colwise() - mean;
    const Mat sample_cov = centered * centered.transpose() / 20000.0;
    // 3 standard errors of a covariance entry at N = 20000 is about 0.011
    CHECK(sample_cov(0, 0) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(sample_cov(1, 1) == doctest::Approx(0.3).epsilon(0.05));
    CHECK(sample_cov(0, 1) == doctest::Approx(0.2).epsilon(0.1));
    CHECK_THROWS_AS(sde::InitialMeasure::gaussian(v2(0, 0), -Mat::Identity(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("ensemble stationary spread matches omega^2 / 2c within 3 standard errors") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    auto e = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(0, 0)), 4000, 9);
    e = sde::evolve_ensemble(std::move(e), f, kNoise04, 0.01, 800, 0);
    for (int i = 0; i < 2; ++i) {
        const double m = e.particles.row(i).mean();
        const double var = (e.particles.row(i).array() - m).square().mean();
        // target 0.08; 3 SE at N = 4000 is about 0.0054, plus O(dt) scheme bias
        CHECK(var == doctest::Approx(0.08).epsilon(0.10));
    }
}

TEST_CASE("thread count never changes the result") {
    const auto f = fields::catalog_drift("hopfield_multistable", {});
    const auto G = fields::catalog_diffusion("paper_inhomogeneous_diffusion", {{"a", 0.4}});
    auto e0 = sde::make_ensemble(sde::InitialMeasure::gaussian(v2(0, 0), Mat::Identity(2, 2)),
                                 257, 21);
    auto e1 = sde::evolve_ensemble(e0, f, G, 0.01, 100, 1);
    auto e4 = sde::evolve_ensemble(e0, f, G, 0.01, 100, 4);
    auto e3 = sde::evolve_ensemble(e0, f, G, 0.01, 100, 3);
    CHECK((e1.particles - e4.particles).cwiseAbs().maxCoeff() == 0.0);
    CHECK((e1.particles - e3.particles).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chunked evolution equals one long run bit for bit") {
    auto e0 = sde::make_ensemble(sde::InitialMeasure::uniform_ball(v2(0, 0), 1.0), 64, 33);
    const auto full = sde::evolve_ensemble(e0, kOu, kNoise04, 0.01, 100, 2);
    auto part = sde::evolve_ensemble(e0, kOu, kNoise04, 0.01, 37, 2);
    part = sde::evolve_ensemble(std::move(part), kOu, kNoise04, 0.01, 63, 2);
    CHECK((full.particles - part.particles).cwiseAbs().maxCoeff() == 0.0);
    CHECK(full.steps_taken == part.steps_taken);
    CHECK(full.time == doctest::Approx(part.time).epsilon(1e-12));
}

TEST_CASE("divergence error carries the step, the smallest particle index, and the state") {
    const fields::DriftField blowup("cubic_blowup", 2, [](double, const Vec& x, Vec& out) {
        out = x.array().pow(3);
    });
    auto e = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(3.0, 3.0)), 8, 1);
    for (int threads : {1, 4}) {
        try {
            sde::evolve_ensemble(e, blowup, kNoNoise, 1.0, 50, threads);
            FAIL("expected divergence");
        } catch (const sde::DivergenceError& err) {
            CHECK(err.particle == 0);  // all particles identical: smallest index wins
            CHECK(err.step >= 0);
            CHECK(err.state.size() == 2);
            CHECK(std::string(err.what()).find("step") != std::string::npos);
        }
    }
}

TEST_CASE("coupled ensembles demand matching shapes and counters") {
    auto ex = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(1, 0)), 16, 1);
    auto ez = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(0, 1)), 16, 2);
    auto bad = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(0, 1)), 17, 2);
    CHECK_THROWS_AS(sde::evolve_coupled_ensembles(ex, bad, kOu, kNoise04, 0.01, 5, 7),
                    std::invalid_argument);
    sde::evolve_coupled_ensembles(ex, ez, kOu, kNoise04, 0.01, 5, 7);
    auto desync = sde::make_ensemble(sde::InitialMeasure::point_mass(v2(0, 1)), 16, 2);
    CHECK_THROWS_AS(sde::evolve_coupled_ensembles(ex, desync, kOu, kNoise04, 0.01, 5, 7),
                    std::invalid_argument);
}

TEST_CASE("coupled ensembles contract pair distances at the deterministic rate") {
    auto ex = sde::make_ensemble(sde::InitialMeasure::uniform_ball(v2(2, 2), 0.5), 128, 4);
    auto ez = sde::make_ensemble(sde::InitialMeasure::uniform_ball(v2(-2, -2), 0.5), 128, 5);
    const Mat d0 = ex.particles - ez.particles;
    sde::evolve_coupled_ensembles(ex, ez, kOu, kNoise04, 0.01, 200, 7);
    const Mat d1 = ex.particles - ez.particles;
    const double factor = std::pow(1.0 - 0.5 * 0.01, 200.0);
    CHECK((d1 - factor * d0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("evolve_ensemble validates dimensions and accepts zero steps") {
    auto e = sde::make_ensemble(sde::InitialMeasure::point_mass(Vec::Zero(3)), 4, 1);
    CHECK_THROWS_AS(sde::evolve_ensemble(e, kOu, kNoise04, 0.01, 10, 1), std::invalid_argument);
    const auto same = sde::evolve_ensemble(e, fields::catalog_drift("ou_linear", {{"c", 1.0}, {"d", 3}}),
                                           fields::isotropic_diffusion(0.1, 3), 0.01, 0, 1);
    CHECK((same.particles - e.particles).cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.steps_taken == 0);
}

}  // TEST_SUITE
