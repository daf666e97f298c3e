#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "lasercoh/analytics.hpp"
#include "lasercoh/pr_ensemble.hpp"
#include "lasercoh/steady_state.hpp"

using namespace lasercoh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("phase states") {
    const auto dist = exact_steady_state(20, 3.0);
    SECTION("zero phase gives a real matrix of amplitude products") {
        const auto st = pure_phase_state(dist, 0.0);
        REQUIRE_THAT(st.rho.trace().real(), WithinAbs(1.0, 1e-12));
        for (int m = 0; m < 20; ++m)
            for (int n = 0; n < 20; ++n) {
                REQUIRE(st.rho(m, n).imag() == 0.0);
                REQUIRE_THAT(st.rho(m, n).real(),
                             WithinAbs(std::sqrt(dist.weights[m] * dist.weights[n]), 1e-14));
            }
    }
    SECTION("rank one at any phase") {
        const auto st = pure_phase_state(dist, 1.1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(st.rho);
        const auto& ev = es.eigenvalues();
        REQUIRE_THAT(ev[ev.size() - 1], WithinAbs(1.0, 1e-10));
        REQUIRE_THAT(std::abs(ev[ev.size() - 2]), WithinAbs(0.0, 1e-10));
        for (int n = 0; n < 20; ++n)
            REQUIRE_THAT(st.rho(n, n).real(), WithinAbs(dist.weights[n], 1e-14));
    }
    SECTION("uniform phase mixture collapses to the diagonal") {
        const int N = 64;
        Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(20, 20);
        for (int j = 0; j < N; ++j)
            avg += pure_phase_state(dist, 2.0 * std::numbers::pi * j / N).rho / double(N);
        for (int m = 0; m < 20; ++m)
            for (int n = 0; n < 20; ++n) {
                const double want = m == n ? dist.weights[n] : 0.0;
                REQUIRE_THAT(std::abs(avg(m, n)), WithinAbs(want, 1e-10));
            }
    }
    SECTION("negative weights are rejected") {
        NumberDistribution bad;
        bad.weights = {0.6, -0.1, 0.5};
        REQUIRE_THROWS_AS(pure_phase_state(bad, 0.0), std::domain_error);
    }
}

TEST_CASE("second phase derivative") {
    const auto dist = exact_steady_state(12, 2.0);
    const auto d2 = second_phase_derivative(dist, 0.0);
    for (int n = 0; n < 12; ++n) REQUIRE(d2(n, n) == 0.0);
    for (int n = 0; n + 1 < 12; ++n)
        REQUIRE_THAT(d2(n + 1, n).real(),
                     WithinAbs(-std::sqrt(dist.weights[n + 1] * dist.weights[n]), 1e-14));
    const auto d2p = second_phase_derivative(dist, 0.7);
    REQUIRE((d2p - d2p.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("relative diffusion distance") {
    SECTION("magnitude at a mid-sweep point") {
        LaserSystem sys(LaserModel::p_family(1001, 30.0));
        const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
        const double r = relative_distance(sys, lp.ell());
        // the sweep reference curve 5.90 p^-1.17 evaluates to 0.1103 here
        const double fit = 5.90 * std::pow(30.0, -1.17);
        REQUIRE(r < 2.0 * fit);
        REQUIRE(r > 0.5 * fit);
    }
    SECTION("independent of the phase choice") {
        LaserSystem sys(LaserModel::p_family(201, 20.0));
        const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
        const double a = relative_distance(sys, lp.ell(), 0.0);
        const double b = relative_distance(sys, lp.ell(), std::numbers::pi / 3.0);
        REQUIRE_THAT(a, WithinAbs(b, 1e-10));
    }
    SECTION("falls like 1/p across the sweep range") {
        double prev = 1e9;
        for (double p : {10.0, 20.0, 40.0}) {
            LaserSystem sys(LaserModel::p_family(401, p));
            const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
            const double r = relative_distance(sys, lp.ell());
            REQUIRE(r < prev);
            REQUIRE_THAT(r * p, WithinRel(3.0, 0.25));  // measured prefactor ~ 2.98 at mu = 500
            prev = r;
        }
    }
    SECTION("decreases with the excitation scale for the regular pump") {
        double prev = 1e9;
        for (int mu : {150, 300, 500}) {
            LaserSystem sys(LaserModel::p_q(2 * mu + 1, 50.0, -1.0));
            const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
            const double r = relative_distance(sys, lp.ell());
            REQUIRE(r < prev);
            prev = r;
        }
        REQUIRE(prev < 0.08);  // approaches the large-mu plateau near 0.07
    }
}

TEST_CASE("generator image of the phase state is Hermitian and traceless") {
    LaserSystem sys(LaserModel::p_lambda(101, 8.0, 0.5));
    const auto clamped = clamp_negative_weights(sys.steady());
    const auto st = pure_phase_state(clamped.dist, 0.4);
    const auto image = sys.apply_to_state(st.rho);
    REQUIRE((image - image.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(std::abs(image.trace()) < 1e-12);
}

TEST_CASE("best-matching diffusion rate") {
    SECTION("tracks the closed form within five percent at p = 50") {
        LaserSystem sys(LaserModel::p_family(1001, 50.0));
        const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
        REQUIRE_THAT(best_match_ell(sys), WithinRel(lp.ell(), 0.05));
    }
    SECTION("family ratios one half and one quarter") {
        const double e_flat = best_match_ell(LaserSystem(LaserModel::p_lambda(501, 50.0, 0.0)));
        const double e_half = best_match_ell(LaserSystem(LaserModel::p_lambda(501, 50.0, 0.5)));
        REQUIRE_THAT(e_half / e_flat, WithinAbs(0.5, 0.01));
        const double e_q0 = best_match_ell(LaserSystem(LaserModel::p_q(501, 50.0, 0.0)));
        const double e_qm1 = best_match_ell(LaserSystem(LaserModel::p_q(501, 50.0, -1.0)));
        REQUIRE_THAT(e_qm1 / e_q0, WithinAbs(0.25, 0.01));
    }
    SECTION("least-squares optimality") {
        LaserSystem sys(LaserModel::p_family(301, 20.0));
        const double best = best_match_ell(sys);
        const double r_best = relative_distance(sys, best);
        for (double f : {0.9, 1.1})
            REQUIRE(relative_distance(sys, best * f) > r_best);
    }
}

TEST_CASE("clamped mass stays tiny in the sweep regime") {
    LaserSystem sys(LaserModel::p_q(1001, 50.0, -1.0));
    REQUIRE(phase_state_clamped_mass(sys) < 1e-6);
}

TEST_CASE("top-level amplitude residual") {
    SECTION("three-level value") {
        REQUIRE_THAT(eigenstate_residual(exact_steady_state(3, 2.0)), WithinAbs(0.5, 1e-14));
    }
    SECTION("asymptotic form at large excitation") {
        const auto d = exact_steady_state(501, 4.0);
        const double mu = 250.0, p = 4.0;
        const double asym = std::pow(std::numbers::pi, -0.25) *
                            std::pow(std::numbers::pi / (2.0 * mu), 0.5 * (p + 1.0)) *
                            std::sqrt(std::exp(std::lgamma(0.5 * (2.0 + p)) -
                                               std::lgamma(0.5 * (1.0 + p))));
        REQUIRE_THAT(eigenstate_residual(d), WithinRel(asym, 0.20));
    }
    SECTION("monotone decreasing in the excitation scale") {
        double prev = 1.0;
        for (int mu : {20, 40, 80, 160}) {
            const double r = eigenstate_residual(exact_steady_state(2 * mu + 1, 4.0));
            REQUIRE(r < prev);
            prev = r;
        }
    }
}
