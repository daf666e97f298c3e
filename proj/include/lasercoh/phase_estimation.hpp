#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "lasercoh/errors.hpp"

namespace lasercoh {

// Timescale of the fixed-gain phase filter: sqrt(C)/(4 flux) with
// C = 4 flux / ell.
inline double filter_timescale(double flux, double ell) {
    if (!(flux > 0.0) || !(ell > 0.0))
        throw std::domain_error("filter_timescale requires positive flux and ell");
    return std::sqrt(4.0 * flux / ell) / (4.0 * flux);
}

// Ideal mean square error of a heterodyne phase estimate over a window tau.
inline double heterodyne_mse(double flux, double tau) {
    if (!(flux > 0.0) || !(tau > 0.0))
        throw std::domain_error("heterodyne_mse requires positive flux and tau");
    return 1.0 / (2.0 * flux * tau);
}

// Window of usable heterodyne pre-estimation times, in units of 1/flux:
// 1/2 << flux*tau << sqrt(C)/4. Nonempty only when C is large enough.
struct HeterodyneWindow {
    double lo = 0.5;
    double hi = 0.0;
    bool feasible() const { return hi > 10.0 * lo; }  // an order of magnitude of room
};

inline HeterodyneWindow heterodyne_window(double coherence) {
    return HeterodyneWindow{0.5, 0.25 * std::sqrt(coherence)};
}

struct FilterConfig {
    double ell = 0.0;      // phase diffusion rate of the beam
    double flux = 1.0;
    double dt = 0.0;       // Euler-Maruyama step
    long steps = 0;
    unsigned seed = 1;
    double burn_in_factor = 20.0;  // in units of the filter timescale
    double v_override = 0.0;       // fixed filter gain; 0 means the stationary value
};

struct EstimationRun {
    FilterConfig config;
    double coherence = 0.0;   // 4 flux / ell
    double v_f = 0.0;         // fixed filter variance parameter
    double tau_f = 0.0;
    long burn_in_steps = 0;
    double mse = 0.0;
    double std_error = 0.0;   // batch-means standard error of the mse
    double bias = 0.0;        // time average of phi - phi_f
};

// Euler-Maruyama simulation of a Wiener beam phase tracked by the fixed-gain
// adaptive filter. Per step, with e = phi - phi_f and the local oscillator
// locked to the current estimate:
//   d phi   = sqrt(ell) dW
//   d phi_f = 4 flux V e dt + sqrt(4 flux) V dW_noise
// The estimate is initialized from a heterodyne pre-estimate of variance
// 1/(2 flux tau_het) with flux*tau_het at the top of the usable window.
inline EstimationRun simulate_filter(const FilterConfig& cfg) {
    if (!(cfg.flux > 0.0)) throw std::domain_error("flux must be positive");
    if (!(cfg.dt > 0.0)) throw std::domain_error("dt must be positive");
    if (cfg.steps <= 0) throw std::domain_error("steps must be positive");
    if (cfg.ell < 0.0) throw std::domain_error("ell must be nonnegative");

    EstimationRun run;
    run.config = cfg;
    const bool diffusing = cfg.ell > 0.0;
    run.coherence = diffusing ? 4.0 * cfg.flux / cfg.ell
                              : std::numeric_limits<double>::infinity();
    run.v_f = cfg.v_override > 0.0 ? cfg.v_override : 1.0 / std::sqrt(run.coherence);
    if (!(run.v_f > 0.0))
        throw std::domain_error("filter gain vanishes; pass v_override for ell = 0");
    run.tau_f = 1.0 / (4.0 * cfg.flux * run.v_f);
    if (cfg.dt > 0.1 * run.tau_f)
        throw std::domain_error("dt must not exceed a tenth of the filter timescale");
    if (diffusing && run.coherence < 1e4)
        throw std::domain_error("coherence below 1e4; the linearized filter does not apply");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double het_tau = heterodyne_window(diffusing ? run.coherence : 1e8).hi / cfg.flux;
    double phi = 0.0;
    double phi_f = phi + normal(rng) * std::sqrt(heterodyne_mse(cfg.flux, het_tau));

    const double burn_tf = std::max(cfg.burn_in_factor, 5.0);
    run.burn_in_steps = static_cast<long>(std::ceil(burn_tf * run.tau_f / cfg.dt));
    if (run.burn_in_steps >= cfg.steps)
        throw std::domain_error("run shorter than its burn-in");

    const double sq_ell_dt = std::sqrt(cfg.ell * cfg.dt);
    const double gain = 4.0 * cfg.flux * run.v_f * cfg.dt;
    const double noise = std::sqrt(4.0 * cfg.flux) * run.v_f * std::sqrt(cfg.dt);

    // batch means over blocks much longer than tau_f give an honest standard
    // error despite the error autocorrelation
    const long n_samples = cfg.steps - run.burn_in_steps;
    const long batch_len = std::max<long>(static_cast<long>(20.0 * run.tau_f / cfg.dt), 1);
    std::vector<double> batch_sums;
    double batch_acc = 0.0;
    long batch_count = 0;

    double sum_sq = 0.0, sum_err = 0.0;
    int consecutive_large = 0;
    for (long i = 0; i < cfg.steps; ++i) {
        const double e = phi - phi_f;
        if (std::abs(e) > 0.5) {
            if (++consecutive_large > 100)
                throw NumericError("linearization breakdown: |phi - phi_f| stayed above 0.5 rad",
                                   std::abs(e));
        } else {
            consecutive_large = 0;
        }
        phi += sq_ell_dt * normal(rng);
        phi_f += gain * e + noise * normal(rng);
        if (i >= run.burn_in_steps) {
            const double err = phi - phi_f;
            sum_sq += err * err;
            sum_err += err;
            batch_acc += err * err;
            if (++batch_count == batch_len) {
                batch_sums.push_back(batch_acc / batch_len);
                batch_acc = 0.0;
                batch_count = 0;
            }
        }
    }
    run.mse = sum_sq / n_samples;
    run.bias = sum_err / n_samples;
    if (batch_sums.size() >= 2) {
        double bm = 0.0;
        for (double b : batch_sums) bm += b;
        bm /= batch_sums.size();
        double var = 0.0;
        for (double b : batch_sums) var += (b - bm) * (b - bm);
        var /= (batch_sums.size() - 1);
        run.std_error = std::sqrt(var / batch_sums.size());
    } else {
        run.std_error = run.mse;  // too short to resolve; report worst case
    }
    return run;
}

}  // namespace lasercoh
