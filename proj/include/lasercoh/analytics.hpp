#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "lasercoh/distribution.hpp"
#include "lasercoh/model.hpp"

namespace lasercoh {
namespace analytics {

// First zero of the Airy function Ai. A single well-known constant; stored
// to double precision rather than pulling in a special-function dependency
// (the tests re-derive it from a series-evaluated Ai by bisection).
inline constexpr double airy_first_zero = -2.338107410459767;

// Upper limit for the beam coherence at stored excitation mu:
// (1/4)|3/z_A|^6 mu^4, prefactor about 1.11553.
inline double heisenberg_bound(double mu) {
    const double c = std::abs(3.0 / airy_first_zero);
    return 0.25 * std::pow(c, 6) * std::pow(mu, 4);
}

// Smallest phase variance attainable at mean excitation mu:
// 4 |z_A/3|^3 / mu^2.
inline double min_phase_variance(double mu) {
    const double c = std::abs(airy_first_zero / 3.0);
    return 4.0 * std::pow(c, 3) / (mu * mu);
}

// Closed-form predictions in the linearized regime (1 << p << mu^2). All
// times in the same units as 1/flux.
struct LinearizedPrediction {
    Family family = Family::PFamily;
    double p = 1.0;
    double mu = 1.0;
    double x = 0.0;  // lambda or q
    double flux = 1.0;
    double k = 0.0;

    static LinearizedPrediction for_model(const LaserModel& m) {
        LinearizedPrediction lp;
        lp.family = m.family;
        lp.p = m.p;
        lp.mu = m.mu();
        lp.x = m.family == Family::PQ ? m.q : m.lambda;
        lp.flux = m.flux;
        lp.k = m.k();
        if (!(m.p >= 10.0 && lp.k <= 0.1))
            std::fprintf(stderr,
                         "linearized formulas requested outside their regime (p=%.3g, k=%.3g)\n",
                         m.p, lp.k);
        return lp;
    }

    static LinearizedPrediction p_lambda(double p, double mu, double lambda, double flux = 1.0) {
        const double k = std::numbers::pi * std::numbers::pi * p / (4.0 * mu * mu);
        return {Family::PLambda, p, mu, lambda, flux, k};
    }
    static LinearizedPrediction p_q(double p, double mu, double q, double flux = 1.0) {
        const double k = std::numbers::pi * std::numbers::pi * p / (4.0 * mu * mu);
        return {Family::PQ, p, mu, q, flux, k};
    }

    bool is_q_family() const { return family == Family::PQ; }

    // family-dependent prefactor of the diffusion rate:
    // 2 lambda^2 - 2 lambda + 1, or (1 + q/2)^2
    double shape_factor() const {
        if (is_q_family()) {
            const double c = 1.0 + 0.5 * x;
            return c * c;
        }
        return 2.0 * x * x - 2.0 * x + 1.0;
    }

    // decay rate of the number-correlation envelope
    double number_rate() const { return is_q_family() ? flux * k * (1.0 + 0.5 * x) : flux * k; }

    // amplitude of g2 - 1 at t = 0, in units of k
    double g2_depth() const { return is_q_family() ? 0.5 * x * (1.0 + 0.5 * x) : x * (x - 1.0); }

    // phase diffusion rate: shape * flux pi^4 p^2 / (64 mu^4)
    double ell() const {
        const double pi4 = std::pow(std::numbers::pi, 4);
        return shape_factor() * flux * pi4 * p * p / (64.0 * std::pow(mu, 4));
    }

    double g2(double t) const { return 1.0 + g2_depth() * k * std::exp(-number_rate() * std::abs(t)); }

    // long-window limit 2 lambda(lambda-1) or q
    double mandel_q_infinity() const { return is_q_family() ? x : 2.0 * x * (x - 1.0); }

    double mandel_q(double t) const {
        const double a = mandel_q_infinity();
        const double arg = number_rate() * t;
        if (arg < 1e-4)  // series branch; the direct form cancels catastrophically
            return a * (0.5 * arg - arg * arg / 6.0);
        return a * (1.0 + (std::exp(-arg) - 1.0) / arg);
    }

    double spectrum(double omega) const {
        const double keff = is_q_family() ? k * (1.0 + 0.5 * x) : k;
        const double num = 2.0 * g2_depth() * k * keff;
        const double rel = omega / flux;
        return flux * (1.0 + num / (keff * keff + rel * rel));
    }

    double g1(double t) const {
        return flux * std::exp(-0.5 * ell() * std::abs(t)) *
               (1.0 + 0.25 * (g2(t) - g2(0.0)));
    }

    // 256 mu^4 / (pi^4 p^2 shape); flux independent
    double coherence() const {
        const double pi4 = std::pow(std::numbers::pi, 4);
        return 256.0 * std::pow(mu, 4) / (pi4 * p * p * shape_factor());
    }
};

// Spread measure 1 - (sum_n sqrt(w_{n+1} w_n))^2; 2pi-periodic phase
// uncertainty, ~ variance for well-localized phase.
inline double phase_spread(const NumberDistribution& d) {
    double s = 0.0;
    for (int n = 0; n + 1 < d.dim(); ++n) {
        const double a = d.weights[n], b = d.weights[n + 1];
        if (a < 0.0 || b < 0.0)
            throw std::domain_error("phase_spread requires nonnegative weights");
        s += std::sqrt(a * b);
    }
    return 1.0 - s * s;
}

// Transition density of the linear-drift diffusion dn = -xi (n - center) dt
// + sqrt(2 chi) dW started from a point mass at n.
inline double ou_propagator(double m, double t, double n, double xi, double chi,
                            double center) {
    if (!(t > 0.0)) throw std::domain_error("ou_propagator requires t > 0");
    if (!(xi > 0.0) || !(chi > 0.0)) throw std::domain_error("ou_propagator: rates must be positive");
    const double var = chi * (1.0 - std::exp(-2.0 * xi * t)) / xi;
    const double mean = center + (n - center) * std::exp(-xi * t);
    const double d = m - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace analytics
}  // namespace lasercoh
