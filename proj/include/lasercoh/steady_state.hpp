#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numbers>
#include <vector>

#include "lasercoh/banded.hpp"
#include "lasercoh/distribution.hpp"
#include "lasercoh/liouvillian.hpp"
#include "lasercoh/model.hpp"

namespace lasercoh {

// Stationary distribution of the lambda-family: weights proportional to
// sin^p(pi (n+1)/(D+1)). Computed on one half and mirrored so the symmetry
// about mu holds exactly in floating point.
inline NumberDistribution exact_steady_state(int D, double p) {
    if (D < 3) throw std::domain_error("D must be >= 3");
    if (!(p > 0.0)) throw std::domain_error("p must be positive");
    NumberDistribution d;
    d.mu = 0.5 * (D - 1);
    d.weights.assign(D, 0.0);
    const double a = std::numbers::pi / (D + 1);
    for (int n = 0; n <= (D - 1) / 2; ++n) {
        const double w = std::pow(std::sin(a * (n + 1)), p);
        d.weights[n] = w;
        d.weights[D - 1 - n] = w;
    }
    double total = 0.0;
    for (double w : d.weights) total += w;
    for (double& w : d.weights) w /= total;
    return d;
}

// Discrete Gaussian with variance 1/k, k = pi^2 p / (4 mu^2), renormalized
// over the D levels.
inline NumberDistribution gaussian_steady_state(int D, double p) {
    if (D < 3) throw std::domain_error("D must be >= 3");
    if (!(p > 0.0)) throw std::domain_error("p must be positive");
    NumberDistribution d;
    d.mu = 0.5 * (D - 1);
    const double k = std::numbers::pi * std::numbers::pi * p / (4.0 * d.mu * d.mu);
    if (k > 0.2)
        std::fprintf(stderr, "gaussian_steady_state: k = %.3g is outside the narrow regime\n", k);
    d.weights.assign(D, 0.0);
    for (int n = 0; n <= (D - 1) / 2; ++n) {
        const double w = std::exp(-0.5 * k * (n - d.mu) * (n - d.mu));
        d.weights[n] = w;
        d.weights[D - 1 - n] = w;
    }
    double total = 0.0;
    for (double w : d.weights) total += w;
    for (double& w : d.weights) w /= total;
    return d;
}

struct SteadySolveReport {
    double residual = 0.0;   // ||M w|| / (||M||_inf ||w||) on the unscaled operator
    int iterations = 0;
    double r_prime = 1.0;    // loss normalization used in the generator (q-family)
};

namespace detail {

// Inverse iteration for the null vector of the s = 0 sector. The operator is
// row equilibrated first: scaling rows leaves the null space untouched while
// taming the enormous edge rates of sharp models. A tiny shift regularizes
// the factorization.
inline std::vector<double> null_vector(const SectorOperator& op, std::vector<double> guess,
                                       double* residual_out, int* iters_out) {
    const int n = op.dim;
    const auto sc = row_scales(op);
    const double shift = 1e-14;  // relative to the equilibrated unit row scale
    auto sp = scaled_sparse<double>(op, 0.0, sc);
    for (int j = 0; j < n; ++j) sp.coeffRef(j, j) -= shift;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sp);
    if (lu.info() != Eigen::Success) throw NumericError("steady-state LU factorization failed");

    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(guess.data(), n);
    x.normalize();
    double res = 0.0;
    int it = 0;
    for (; it < 100; ++it) {
        Eigen::VectorXd y = lu.solve(x);
        y.normalize();
        x = y;
        std::vector<double> xs(x.data(), x.data() + n);
        auto mx = op.apply(xs);
        double rn = 0.0;
        for (int j = 0; j < n; ++j) rn = std::max(rn, std::abs(mx[j]) * sc[j]);
        res = rn;  // equilibrated operator has unit row scale
        if (res < 1e-12) break;
    }
    if (res >= 1e-10)
        throw NumericError("steady-state inverse iteration did not converge", res);
    if (residual_out) *residual_out = res;
    if (iters_out) *iters_out = it + 1;
    return std::vector<double>(x.data(), x.data() + n);
}

inline void fix_sign_and_normalize(std::vector<double>& w) {
    int peak = 0;
    for (int j = 1; j < static_cast<int>(w.size()); ++j)
        if (std::abs(w[j]) > std::abs(w[peak])) peak = j;
    // entries below the solve's rounding floor are noise, not physics; left
    // in place they masquerade as occupied tail levels
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w[peak]);
    for (double& v : w)
        if (std::abs(v) < floor) v = 0.0;
    double total = 0.0;
    for (double v : w) total += v;
    if (w[peak] < 0.0) total = -total;  // flip so the dominant entry is positive
    if (std::abs(total) < 1e-300) throw NumericError("steady state has zero total weight");
    const double inv = (w[peak] < 0.0 ? -1.0 : 1.0) / std::abs(total);
    for (double& v : w) v *= inv;
}

}  // namespace detail

// Null vector of the s = 0 sector, normalized to unit sum. For the q-family
// the loss normalization r' feeds back into the generator, so the solve runs
// once with r' = 1, recomputes r' from the resulting distribution, and
// re-solves; the remaining error is second order and negligible for D >= 51.
inline NumberDistribution numeric_steady_state(const LaserModel& model, Variant variant,
                                               SteadySolveReport* report = nullptr) {
    model.validate();
    SteadySolveReport rep;
    NumberDistribution d;
    d.mu = model.mu();

    auto guess = exact_steady_state(model.dim, model.p).weights;
    SectorScale scale;
    auto op = build_sector_raw(model, 0, variant, scale);
    auto w = detail::null_vector(op, guess, &rep.residual, &rep.iterations);
    detail::fix_sign_and_normalize(w);

    if (model.family == Family::PQ) {
        NumberDistribution pass1{w, d.mu};
        scale.r_prime = normalization_r(model, pass1, variant);
        op = build_sector_raw(model, 0, variant, scale);
        w = detail::null_vector(op, w, &rep.residual, &rep.iterations);
        detail::fix_sign_and_normalize(w);
        rep.r_prime = scale.r_prime;
    }

    d.weights = std::move(w);
    if (report) *report = rep;
    return d;
}

}  // namespace lasercoh
