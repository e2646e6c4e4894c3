#include <doctest.h>

#include "driftlab/fields.hpp"
#include "driftlab/harness.hpp"

using namespace driftlab;
using fields::Vec;
using harness::ClaimId;
using harness::Verdict;

namespace {

sde::InitialMeasure point(double x, double y) {
    Vec v(2);
    v << x, y;
    return sde::InitialMeasure::point_mass(v);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("identifier names round through to_string") {
    CHECK(harness::to_string(ClaimId::thm1_decay) == "thm1_decay");
    CHECK(harness::to_string(ClaimId::prop1_chi_bound) == "prop1_chi_bound");
    CHECK(harness::to_string(ClaimId::prop2_mass_sink) == "prop2_mass_sink");
    CHECK(harness::to_string(ClaimId::thm2_concentration) == "thm2_concentration");
    CHECK(harness::to_string(Verdict::pass) == "pass");
    CHECK(harness::to_string(Verdict::fail) == "fail");
    CHECK(harness::to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("coupled decay of a linear contraction passes at the predicted rate") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    const auto G = fields::isotropic_diffusion(0.3, 2);
    harness::Thm1Options opts;
    opts.T = 6.0;
    opts.n_pairs = 150;
    opts.n_checkpoints = 24;
    opts.seed = 11;
    const auto rep = harness::verify_thm1(f, G, point(2.0, 2.0), point(-2.0, -2.0), opts);

    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.claim_id == ClaimId::thm1_decay);
    // constant diffusion: required decay is 2c, slope measured on log W2^2
    CHECK(rep.measured.at("c_hat") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.measured.at("L_G_hat_squared") == 0.0);
    CHECK(rep.measured.at("decay_rate") == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rep.measured.at("r_squared") > 0.99);
    CHECK(rep.measured.at("w2_final") < rep.measured.at("w2_initial"));
    CHECK(rep.bound.at("required_decay_rate") == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.provenance.count("seed") == 1);
    CHECK(rep.provenance.at("w2_method") == "exact_assignment");

    REQUIRE(rep.series.size() == 1);
    CHECK(rep.series[0].name == "w2");
    CHECK(rep.series[0].rows.size() == 25);  // t = 0 plus each checkpoint
}

TEST_CASE("decay claim goes inconclusive when the rate does not clear the noise") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 0.3}});
    const auto G = fields::catalog_diffusion("paper_inhomogeneous_diffusion", {{"a", 0.9}});
    harness::Thm1Options opts;
    opts.T = 2.0;
    opts.n_pairs = 100;
    opts.seed = 12;
    const auto rep = harness::verify_thm1(f, G, point(1.0, 1.0), point(-1.0, -1.0), opts);

    CHECK(rep.verdict == Verdict::inconclusive);
    CHECK(rep.note.find("hypothesis") != std::string::npos);
    // the sampled squared Lipschitz constant of the trig diffusion is ~a^2
    CHECK(rep.measured.at("L_G_hat_squared") > 0.7);
}

TEST_CASE("identical initial measures short-circuit to a trivial pass") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    const auto G = fields::isotropic_diffusion(0.3, 2);
    harness::Thm1Options opts;
    opts.T = 1.0;
    opts.n_pairs = 50;
    opts.n_checkpoints = 5;
    const auto rep = harness::verify_thm1(f, G, point(0.5, -0.5), point(0.5, -0.5), opts);

    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.note.find("identical initial measures") != std::string::npos);
    CHECK(rep.measured.at("w2_max") < 1e-9);
}

TEST_CASE("an empty fit window is reported inconclusive, not forced") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    const auto G = fields::isotropic_diffusion(0.3, 2);
    harness::Thm1Options opts;
    opts.T = 1.0;
    opts.n_pairs = 60;
    opts.n_checkpoints = 4;
    opts.plateau_factor = 1e9;  // no checkpoint clears the window threshold
    const auto rep = harness::verify_thm1(f, G, point(2.0, 0.0), point(-2.0, 0.0), opts);

    CHECK(rep.verdict == Verdict::inconclusive);
    CHECK(rep.note.find("plateau") != std::string::npos);
}

TEST_CASE("stationary spread bound holds for two constant diffusion scales") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    const auto G = fields::isotropic_diffusion(0.4, 2);
    const auto Q = fields::isotropic_diffusion(0.2, 2);
    harness::Prop1Options opts;
    opts.N = 1200;
    opts.T = 10.0;
    opts.seed = 13;
    const auto rep = harness::verify_prop1(f, G, Q, opts);

    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.claim_id == ClaimId::prop1_chi_bound);
    // sup |G - Q|_F^2 = 2 * 0.2^2; gaussian stationaries give W2^2 = 0.04
    CHECK(rep.measured.at("chi2_sampled") == doctest::Approx(0.08).epsilon(1e-9));
    CHECK(rep.measured.at("w2_squared") == doctest::Approx(0.04).epsilon(0.35));
    CHECK(rep.measured.at("w2_squared") <= rep.bound.at("chi2_plus_margin"));
    CHECK(rep.series.size() == 2);
}

TEST_CASE("mass sink verdict follows the threshold condition") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    contraction::EquilibriumRecord eq;
    eq.x_star = Vec::Zero(2);
    eq.stable = true;
    eq.jacobian_spectrum_abscissa = -1.0;
    eq.r_star = 1.0;
    eq.c_star = 1.0;

    harness::Prop2Options opts;
    opts.T = 3.0;
    opts.N = 2000;
    opts.seed = 14;
    const auto mu0 = sde::InitialMeasure::uniform_ball(Vec::Zero(2), 0.5);

    SUBCASE("small noise keeps the ball mass and passes") {
        const auto rep = harness::verify_prop2(f, eq, 0.3, mu0, opts);
        CHECK(rep.verdict == Verdict::pass);
        CHECK(rep.measured.at("c_star") == 1.0);
        CHECK(rep.bound.at("sink_threshold") == doctest::Approx(0.09).epsilon(1e-12));
        CHECK(rep.measured.at("fpe_mass_final") >=
              rep.measured.at("fpe_mass_initial") - opts.mass_tolerance);
        CHECK(rep.measured.at("particle_mass_final") >=
              rep.measured.at("particle_mass_initial") - opts.mass_tolerance);
        REQUIRE(rep.series.size() == 2);
        CHECK(rep.series[0].name == "mass_fpe");
        CHECK(rep.series[1].name == "mass_particles");
    }

    SUBCASE("large noise misses the threshold and stays inconclusive") {
        opts.T = 1.0;
        const auto rep = harness::verify_prop2(f, eq, 3.0, mu0, opts);
        CHECK(rep.verdict == Verdict::inconclusive);
        CHECK(rep.note.find("sink threshold unmet") != std::string::npos);
        CHECK(rep.bound.at("sink_threshold") == doctest::Approx(9.0).epsilon(1e-12));
        // the run is still recorded for inspection
        CHECK(rep.series.size() == 2);
    }
}

TEST_CASE("reports render all their sections as text") {
    const auto f = fields::catalog_drift("ou_linear", {{"c", 1.0}});
    const auto G = fields::isotropic_diffusion(0.3, 2);
    harness::Thm1Options opts;
    opts.T = 1.0;
    opts.n_pairs = 50;
    opts.n_checkpoints = 5;
    const auto rep = harness::verify_thm1(f, G, point(0.0, 0.0), point(0.0, 0.0), opts);

    const std::string text = rep.to_text();
    CHECK(text.find("claim: thm1_decay") != std::string::npos);
    CHECK(text.find("verdict: pass") != std::string::npos);
    CHECK(text.find("measured:") != std::string::npos);
    CHECK(text.find("provenance:") != std::string::npos);
    CHECK(text.find("seed") != std::string::npos);
}

}  // TEST_SUITE
