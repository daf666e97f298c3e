#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lasercoh/phase_estimation.hpp"

using namespace lasercoh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FilterConfig config_for(double coherence, unsigned seed, double windows = 2000.0) {
    FilterConfig cfg;
    cfg.ell = 4.0 / coherence;
    cfg.flux = 1.0;
    const double tau = filter_timescale(cfg.flux, cfg.ell);
    cfg.dt = 0.01 * tau;
    cfg.steps = static_cast<long>(windows * tau / cfg.dt);
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("filter timescale identities") {
    REQUIRE_THAT(filter_timescale(1.0, 4e-6), WithinRel(250.0, 1e-12));
    for (double ell : {1e-5, 4e-4}) {
        const double tau = filter_timescale(1.0, ell);
        const double vf = std::sqrt(ell / 4.0);
        REQUIRE_THAT(4.0 * 1.0 * vf * tau, WithinRel(1.0, 1e-12));
        REQUIRE(tau < 1.0 / ell);  // far inside the coherence time
    }
    REQUIRE_THROWS_AS(filter_timescale(0.0, 1.0), std::domain_error);
}

TEST_CASE("heterodyne pre-estimation") {
    REQUIRE_THAT(heterodyne_mse(1.0, 50.0), WithinRel(0.01, 1e-12));
    REQUIRE(heterodyne_mse(1.0, 100.0) < heterodyne_mse(1.0, 50.0));
    REQUIRE_THROWS_AS(heterodyne_mse(1.0, 0.0), std::domain_error);

    // a usable pre-estimation window opens once the coherence is large
    REQUIRE(heterodyne_window(1e4).feasible());
    REQUIRE(heterodyne_window(1e6).feasible());
    REQUIRE_FALSE(heterodyne_window(100.0).feasible());
}

TEST_CASE("filter reaches the stationary error floor") {
    const int nseeds = 20;
    for (double coherence : {1e4, 1e6}) {
        double sum = 0.0, sum2 = 0.0;
        for (int s = 1; s <= nseeds; ++s) {
            const auto run = simulate_filter(config_for(coherence, 1000 * s + (coherence > 1e5)));
            REQUIRE(run.mse >= 0.0);
            REQUIRE(run.burn_in_steps >= static_cast<long>(5.0 * run.tau_f / run.config.dt));
            sum += run.mse;
            sum2 += run.mse * run.mse;
        }
        const double mean = sum / nseeds;
        const double sd = std::sqrt((sum2 - nseeds * mean * mean) / (nseeds - 1));
        const double se = sd / std::sqrt(double(nseeds));
        const double target = 1.0 / std::sqrt(coherence);
        INFO("coherence " << coherence << " mse " << mean << " target " << target);
        REQUIRE(std::abs(mean - target) < 3.0 * se);
    }
}

TEST_CASE("single long run sits within ten percent of the floor") {
    FilterConfig cfg = config_for(1e6, 7, 100.0);
    cfg.steps = 1000000;
    const auto run = simulate_filter(cfg);
    REQUIRE_THAT(run.mse, WithinRel(1e-3, 0.10));
}

TEST_CASE("halving the diffusion rate scales the error by one over root two") {
    const auto a = simulate_filter(config_for(1e6, 21));
    const auto b = simulate_filter(config_for(2e6, 21));
    REQUIRE_THAT(b.mse / a.mse, WithinAbs(1.0 / std::sqrt(2.0), 0.15 / std::sqrt(2.0)));
}

TEST_CASE("estimator is unbiased") {
    const int nseeds = 20;
    double sum = 0.0, sum2 = 0.0;
    for (int s = 1; s <= nseeds; ++s) {
        const auto run = simulate_filter(config_for(1e4, 500 + s));
        sum += run.bias;
        sum2 += run.bias * run.bias;
    }
    const double mean = sum / nseeds;
    const double sd = std::sqrt((sum2 - nseeds * mean * mean) / (nseeds - 1));
    REQUIRE(std::abs(mean) < 3.0 * sd / std::sqrt(double(nseeds)));
}

TEST_CASE("weak convergence: halving dt moves the mean error under two percent") {
    const int nseeds = 40;
    double coarse = 0.0, fine = 0.0;
    for (int s = 1; s <= nseeds; ++s) {
        auto cfg = config_for(1e4, 9000 + s, 1000.0);
        coarse += simulate_filter(cfg).mse / nseeds;
        cfg.dt *= 0.5;
        cfg.steps *= 2;
        fine += simulate_filter(cfg).mse / nseeds;
    }
    REQUIRE(std::abs(fine - coarse) / coarse < 0.02);
}

TEST_CASE("static phase limit: a gentler gain tracks ever more tightly") {
    // with no phase diffusion the fixed-gain error floor is V/2, vanishing
    // with the gain
    FilterConfig cfg;
    cfg.ell = 0.0;
    cfg.flux = 1.0;
    cfg.seed = 5;
    double prev = 1.0;
    for (double v : {1e-2, 1e-3}) {
        cfg.v_override = v;
        const double tau = 1.0 / (4.0 * cfg.flux * v);
        cfg.dt = 0.01 * tau;
        cfg.steps = static_cast<long>(3000.0 * tau / cfg.dt);
        const auto run = simulate_filter(cfg);
        REQUIRE_THAT(run.mse, WithinRel(0.5 * v, 0.2));
        REQUIRE(run.mse < prev);
        prev = run.mse;
    }
}

TEST_CASE("configuration validation") {
    FilterConfig cfg = config_for(1e6, 1);
    cfg.dt = cfg.steps = 0;
    REQUIRE_THROWS_AS(simulate_filter(cfg), std::domain_error);
    cfg = config_for(1e6, 1);
    cfg.dt = filter_timescale(1.0, cfg.ell);  // an order too coarse
    REQUIRE_THROWS_AS(simulate_filter(cfg), std::domain_error);
    cfg = config_for(100.0, 1);  // coherence below the linearized regime
    REQUIRE_THROWS_AS(simulate_filter(cfg), std::domain_error);
    cfg = config_for(1e6, 1);
    cfg.steps = cfg.burn_in_factor;  // shorter than burn-in
    REQUIRE_THROWS_AS(simulate_filter(cfg), std::domain_error);
}

TEST_CASE("runs are reproducible by seed") {
    const auto a = simulate_filter(config_for(1e4, 42));
    const auto b = simulate_filter(config_for(1e4, 42));
    REQUIRE(a.mse == b.mse);
    REQUIRE(a.bias == b.bias);
    const auto c = simulate_filter(config_for(1e4, 43));
    REQUIRE(a.mse != c.mse);
}
