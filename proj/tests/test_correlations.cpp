#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lasercoh/analytics.hpp"
#include "lasercoh/correlations.hpp"
#include "lasercoh/liouvillian.hpp"

using namespace lasercoh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("g1 starts at the photon flux") {
    LaserSystem sys(LaserModel::p_lambda(101, 8.0, 0.5, 2.5));
    const auto s = g1(sys, {0.0, 1.0, 10.0});
    REQUIRE_THAT(s.values[0], WithinRel(2.5, 1e-8));
}

TEST_CASE("g1 long-time decay matches the diffusion-rate formula") {
    LaserSystem sys(LaserModel::p_family(501, 50.0));
    const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
    const double ell = lp.ell();
    auto grid = geometric_grid(1.0 / ell, 4.2 / ell, 160);
    grid.insert(grid.begin(), 0.0);
    const auto s = g1(sys, grid);
    const double rate = fit_decay_rate(s, 2.0 / ell, 4.0 / ell);
    REQUIRE_THAT(2.0 * rate, WithinRel(ell, 0.05));
}

TEST_CASE("short-time dip of g1 tracks the pair-correlation deficit") {
    LaserSystem sys(LaserModel::p_lambda(501, 50.0, 0.5));
    const double k = sys.model().k();
    // reference decay taken from the realized coherence so the long-time
    // envelope cancels exactly
    const double ell_num = 4.0 * sys.model().flux / coherence_resolvent(sys);

    auto grid = geometric_grid(0.05 / k, 5.0 / k, 40);
    grid.insert(grid.begin(), 0.0);
    const auto s1 = g1(sys, grid);
    const auto s2 = g2(sys, grid);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double envelope = std::exp(-0.5 * ell_num * grid[i]);
        const double dip = s1.values[i] / envelope - 1.0;
        const double want = 0.25 * (s2.values[i] - s2.values[0]);
        REQUIRE_THAT(dip, WithinAbs(want, 0.10 * std::abs(want) + 2e-7));
    }
}

TEST_CASE("pair correlations stay Poissonian for flat gain") {
    LaserSystem sys(LaserModel::p_family(501, 50.0));
    const auto s = g2(sys, default_time_grid(sys.model(), 60));
    for (double v : s.values) REQUIRE_THAT(v, WithinAbs(1.0, 1e-6));
}

TEST_CASE("pair-correlation depth at zero delay") {
    for (auto m : {LaserModel::p_lambda(501, 50.0, 0.5), LaserModel::p_q(501, 50.0, -1.0)}) {
        LaserSystem sys(m);
        const double k = m.k();
        const auto s = g2(sys, {0.0, 1.0});
        INFO(m.family_name());
        REQUIRE_THAT(s.values[0], WithinAbs(1.0 - 0.25 * k, 5e-5));
    }
}

TEST_CASE("pair correlations relax to one over long windows") {
    LaserSystem sys(LaserModel::p_lambda(501, 50.0, 0.5));
    const auto s = g2(sys, default_time_grid(sys.model(), 120));
    REQUIRE(s.grid.back() > 10.0 / (sys.model().flux * sys.model().k()));
    REQUIRE_THAT(s.values.back(), WithinAbs(1.0, 1e-4));
}

TEST_CASE("pump-statistics pair correlations decay at the reduced rate") {
    LaserSystem sys(LaserModel::p_q(501, 50.0, -1.0));
    const double keff = sys.model().k() * 0.5;  // (1 + q/2) k
    auto grid = geometric_grid(0.2 / keff, 4.0 / keff, 200);
    grid.insert(grid.begin(), 0.0);
    auto s = g2(sys, grid);
    for (double& v : s.values) v -= 1.0;  // fit the approach to one
    s.kind = SeriesKind::G2;
    const double rate = fit_decay_rate(s, 1.0 / keff, 3.0 / keff);
    REQUIRE_THAT(rate, WithinRel(keff, 0.05));
}

TEST_CASE("g2 deficit is negative, rising and concave") {
    for (auto m : {LaserModel::p_lambda(301, 30.0, 0.5), LaserModel::p_q(301, 30.0, -0.7)}) {
        LaserSystem sys(m);
        const auto s = g2(sys, default_time_grid(m, 80));
        const double slack = 1e-9;
        double prev_slope = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < s.grid.size(); ++i) {
            REQUIRE(s.values[i] < 1.0 + slack);
            const double slope =
                (s.values[i + 1] - s.values[i]) / (s.grid[i + 1] - s.grid[i]);
            REQUIRE(slope > -slack * sys.model().k());
            REQUIRE(slope < prev_slope + slack * sys.model().k());
            prev_slope = slope;
        }
    }
}

TEST_CASE("coherence against the closed form and its family ratios") {
    LaserSystem base(LaserModel::p_family(501, 50.0));
    const double c0 = coherence_resolvent(base);
    const auto lp = analytics::LinearizedPrediction::for_model(base.model());

    // the exact generator sits 2.5 percent below the closed form at p = 50,
    // mu = 250 (the gap decays like a power of p); pin the measured value
    const double eps = std::abs(c0 - lp.coherence()) / lp.coherence();
    REQUIRE(eps > 0.02);
    REQUIRE(eps < 0.035);

    const double c_half = coherence_resolvent(LaserSystem(LaserModel::p_lambda(501, 50.0, 0.5)));
    REQUIRE_THAT(c_half / c0, WithinAbs(2.0, 0.04));

    const double cq0 = coherence_resolvent(LaserSystem(LaserModel::p_q(501, 50.0, 0.0)));
    const double cq1 = coherence_resolvent(LaserSystem(LaserModel::p_q(501, 50.0, -1.0)));
    REQUIRE_THAT(cq1 / cq0, WithinAbs(4.0, 0.12));
}

TEST_CASE("relative coherence error shrinks with sharper models") {
    double prev = 1.0;
    for (double p : {20.0, 30.0, 40.0, 50.0}) {
        LaserSystem sys(LaserModel::p_family(501, p));
        const auto lp = analytics::LinearizedPrediction::for_model(sys.model());
        const double eps = std::abs(coherence_resolvent(sys) - lp.coherence()) / lp.coherence();
        REQUIRE(eps < prev);
        prev = eps;
    }
}

TEST_CASE("resolvent and time-integral coherence agree") {
    for (auto m : {LaserModel::p_family(501, 50.0), LaserModel::p_q(501, 50.0, -1.0),
                   LaserModel::p_lambda(201, 20.0, 0.5)}) {
        LaserSystem sys(m);
        const double a = coherence_resolvent(sys);
        const double b = coherence_time_integral(sys);
        INFO(m.family_name() << " D " << m.dim);
        REQUIRE(std::abs(a - b) / a < 1e-3);
        REQUIRE_NOTHROW(coherence(sys, true));
    }
}

TEST_CASE("coherence is independent of the flux scale") {
    const double a = coherence_resolvent(LaserSystem(LaserModel::p_family(301, 30.0, 1.0)));
    const double b = coherence_resolvent(LaserSystem(LaserModel::p_family(301, 30.0, 2.5)));
    REQUIRE_THAT(b, WithinRel(a, 1e-9));
}

TEST_CASE("intensity noise spectrum") {
    SECTION("half shot noise at zero frequency for the deepest lambda dip") {
        LaserSystem sys(LaserModel::p_lambda(501, 50.0, 0.5));
        const auto s = intensity_spectrum(sys, {0.0});
        REQUIRE_THAT(s.values[0], WithinAbs(0.5, 0.01 * 0.5));
    }
    SECTION("full noise suppression at zero frequency for the regular pump") {
        LaserSystem sys(LaserModel::p_q(501, 50.0, -1.0));
        const auto s = intensity_spectrum(sys, {0.0});
        REQUIRE_THAT(s.values[0], WithinAbs(0.0, 0.01));
    }
    SECTION("shot-noise floor at high frequency") {
        LaserSystem sys(LaserModel::p_lambda(501, 50.0, 0.5));
        const double k = sys.model().k();
        const auto s = intensity_spectrum(sys, {100.0 * k});
        REQUIRE_THAT(s.values[0], WithinRel(1.0, 0.01));
    }
    SECTION("resolvent and cosine-transform paths agree") {
        for (auto m : {LaserModel::p_lambda(501, 50.0, 0.5), LaserModel::p_q(501, 50.0, -1.0)}) {
            LaserSystem sys(m);
            const auto grid = default_omega_grid(m, 40);
            const auto a = intensity_spectrum(sys, grid);
            const auto b = intensity_spectrum_cosine(sys, grid);
            for (size_t i = 0; i < grid.size(); ++i)
                REQUIRE_THAT(a.values[i], WithinAbs(b.values[i], 0.005 * m.flux));
        }
    }
    SECTION("zero-frequency value matches the long-window count statistic") {
        LaserSystem sys(LaserModel::p_lambda(501, 50.0, 0.5));
        const double s0 = intensity_spectrum(sys, {0.0}).values[0];
        const double keff = sys.model().k() * sys.model().flux;
        const double q = mandel_q(sys, 200.0 / keff);
        REQUIRE_THAT(s0 / sys.model().flux - 1.0, WithinAbs(q, 0.012));
    }
}

TEST_CASE("windowed count statistics") {
    SECTION("deep sub-Poissonian limits") {
        LaserSystem lam(LaserModel::p_lambda(501, 50.0, 0.5));
        const double k = lam.model().k();
        REQUIRE_THAT(mandel_q(lam, 100.0 / k), WithinAbs(-0.5, 0.01));

        LaserSystem pump(LaserModel::p_q(501, 50.0, -1.0));
        const double keff = 0.5 * k;
        REQUIRE_THAT(mandel_q(pump, 100.0 / keff), WithinAbs(-1.0, 0.02));
    }
    SECTION("vanishing on short windows") {
        LaserSystem sys(LaserModel::p_lambda(301, 30.0, 0.5));
        REQUIRE_THAT(mandel_q(sys, 1e-4), WithinAbs(0.0, 1e-3));
    }
    SECTION("domain") {
        LaserSystem sys(LaserModel::p_family(51, 4.0));
        REQUIRE_THROWS_AS(mandel_q(sys, 0.0), std::domain_error);
    }
}

TEST_CASE("first-order coherence is real: dense complex oracle") {
    const auto m = LaserModel::p_lambda(6, 2.0, 0.4, 1.3);
    LaserSystem sys(m);
    const int D = m.dim;

    // full vectorized evolution of L rho_ss with the dense superoperator
    const auto super = dense_superoperator(m, Variant::Exact, SectorScale{sys.r(), sys.r_prime()});
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(D, D);
    for (int n = 1; n < D; ++n) L(n - 1, n) = sys.loss()[n];
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(D, D);
    for (int n = 0; n < D; ++n) rho(n, n) = sys.steady().weights[n];
    const Eigen::MatrixXd lrho = L * rho;

    Eigen::VectorXd vec(D * D);
    for (int n = 0; n < D; ++n)
        for (int mm = 0; mm < D; ++mm) vec[n * D + mm] = lrho(mm, n);

    const double flux_norm = m.flux * sys.loss_norm();
    for (double t : {0.3, 1.0, 4.0}) {
        const Eigen::MatrixXd prop = (super * t).exp();
        const Eigen::VectorXd evolved = prop * vec;
        std::complex<double> tr = 0.0;
        for (int n = 1; n < D; ++n) tr += sys.loss()[n] * evolved[n * D + (n - 1)];
        const double dense_value = flux_norm * tr.real();
        REQUIRE(std::abs(tr.imag()) < 1e-12);

        const auto s = g1(sys, {0.0, t});
        REQUIRE_THAT(s.values[1], WithinAbs(dense_value, 1e-8));
    }
}

TEST_CASE("series validation rejects non-increasing grids") {
    LaserSystem sys(LaserModel::p_family(51, 4.0));
    REQUIRE_THROWS_AS(g1(sys, {0.0, 2.0, 1.0}), std::domain_error);
}

TEST_CASE("default grids") {
    const auto m = LaserModel::p_family(101, 10.0, 2.0);
    const auto t = default_time_grid(m);
    REQUIRE(t.front() == 0.0);
    REQUIRE(t.size() == 401);
    REQUIRE_THAT(t.back(), WithinRel(50.0 / (m.flux * m.k()), 1e-12));
    const auto w = default_omega_grid(m);
    REQUIRE(w.front() == 0.0);
    REQUIRE_THAT(w.back(), WithinRel(20.0 * m.flux * m.k(), 1e-12));
}
