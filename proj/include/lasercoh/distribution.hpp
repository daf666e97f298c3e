#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lasercoh {

// Real-weighted distribution over the Fock levels n = 0..D-1. Weights sum to
// one. Sub-Poissonian pump generators can leave small negative entries in the
// tails, so weights are signed; consumers that need a proper probability
// vector clamp explicitly (see clamp_negative_weights).
struct NumberDistribution {
    std::vector<double> weights;
    double mu = 0.0;  // model center (D-1)/2, kept as metadata

    int dim() const { return static_cast<int>(weights.size()); }
};

// First two discrete moments, accumulated around the model center to avoid
// cancellation at large D.
inline std::pair<double, double> mean_and_variance(const NumberDistribution& d) {
    double m1 = 0.0;
    for (int n = 0; n < d.dim(); ++n) m1 += (n - d.mu) * d.weights[n];
    const double mean = d.mu + m1;
    double var = 0.0;
    for (int n = 0; n < d.dim(); ++n) {
        const double dn = n - mean;
        var += dn * dn * d.weights[n];
    }
    return {mean, var};
}

// |sum of negative weights|; zero for a physical distribution.
inline double negativity_diagnostic(const NumberDistribution& d) {
    double s = 0.0;
    for (double w : d.weights)
        if (w < 0.0) s += w;
    return std::abs(s);
}

struct ClampResult {
    NumberDistribution dist;
    double clamped_mass = 0.0;  // total negative mass removed
};

// Zero out negative entries and renormalize to unit sum.
inline ClampResult clamp_negative_weights(const NumberDistribution& d) {
    ClampResult out;
    out.dist = d;
    double total = 0.0;
    for (double& w : out.dist.weights) {
        if (w < 0.0) {
            out.clamped_mass += -w;
            w = 0.0;
        }
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("distribution has no positive mass");
    for (double& w : out.dist.weights) w /= total;
    return out;
}

}  // namespace lasercoh
