#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lasercoh/distribution.hpp"

namespace lasercoh {

enum class Family { PLambda, PQ, PFamily };

// Which coefficient set backs the generator: the exact sine-ratio matrix
// elements, or their linearization about the distribution center.
enum class Variant { Exact, Linearized };

// Descriptor for one laser model: Hilbert-space dimension D, sharpness
// exponent p, the family shape parameter (lambda or q) and the beam photon
// flux. mu and k are derived. The p-family coincides with lambda = 0 and
// q = 0; all three use the same code paths so the coincidence is bitwise.
struct LaserModel {
    Family family = Family::PFamily;
    int dim = 3;        // D
    double p = 1.0;
    double lambda = 0.0;  // PLambda only
    double q = 0.0;       // PQ only, q in (-1, inf)
    double flux = 1.0;    // photon flux, units 1/time

    double mu() const { return 0.5 * (dim - 1); }
    double k() const {
        const double m = mu();
        return std::numbers::pi * std::numbers::pi * p / (4.0 * m * m);
    }

    // Exponent parameter x of the gain profile (lambda-like): gain varies
    // with x, loss with 1-x.
    double gain_x() const { return family == Family::PLambda ? lambda : 0.0; }
    double loss_x() const {
        switch (family) {
            case Family::PLambda: return lambda;
            case Family::PQ: return -0.5 * q;
            default: return 0.0;
        }
    }

    std::string family_name() const {
        switch (family) {
            case Family::PLambda: return "plambda";
            case Family::PQ: return "pq";
            default: return "pfamily";
        }
    }

    void validate() const {
        if (dim < 3) throw std::domain_error("model dimension must be >= 3");
        if (!(p > 0.0)) throw std::domain_error("sharpness exponent p must be positive");
        if (!(flux > 0.0)) throw std::domain_error("flux must be positive");
        if (family == Family::PQ && !(q >= -1.0))
            throw std::domain_error("pump parameter q must be >= -1");
    }

    static LaserModel p_lambda(int D, double p, double lambda, double flux = 1.0) {
        LaserModel m{Family::PLambda, D, p, lambda, 0.0, flux};
        m.validate();
        return m;
    }
    static LaserModel p_q(int D, double p, double q, double flux = 1.0) {
        LaserModel m{Family::PQ, D, p, 0.0, q, flux};
        m.validate();
        return m;
    }
    static LaserModel p_family(int D, double p, double flux = 1.0) {
        LaserModel m{Family::PFamily, D, p, 0.0, 0.0, flux};
        m.validate();
        return m;
    }
};

namespace detail {
inline void check_level(int n, int dim) {
    if (n < 1 || n > dim - 1)
        throw std::domain_error("level index " + std::to_string(n) + " outside [1, D-1]");
}
}  // namespace detail

// <n|G|n-1>: ratio of adjacent sine weights raised to p*x/2. Flat (exactly 1)
// whenever the gain exponent vanishes.
inline double gain_coefficient(int n, const LaserModel& m) {
    detail::check_level(n, m.dim);
    const double a = std::numbers::pi / (m.dim + 1);
    const double expo = 0.5 * m.p * m.gain_x();
    return std::pow(std::sin(a * (n + 1)) / std::sin(a * n), expo);
}

// <n-1|L|n>: inverse sine ratio raised to p*(1-x)/2.
inline double loss_coefficient(int n, const LaserModel& m) {
    detail::check_level(n, m.dim);
    const double a = std::numbers::pi / (m.dim + 1);
    const double expo = 0.5 * m.p * (1.0 - m.loss_x());
    return std::pow(std::sin(a * n) / std::sin(a * (n + 1)), expo);
}

// Linearized diagonal of L^dag L at level n: 1 + k(1-x)(n-mu). Valid only
// while positive; a nonpositive value means the linearization broke down at
// this level and the caller must shrink k or recenter.
inline double linearized_loss_sq(int n, double k, double x, double mu) {
    const double v = 1.0 + k * (1.0 - x) * (n - mu);
    if (!(v > 0.0))
        throw std::domain_error("linearized loss coefficient nonpositive at n=" + std::to_string(n));
    return v;
}

// Linearized diagonal of G^dag G at level n: 1 - k x (n-mu).
inline double linearized_gain_sq(int n, double k, double x, double mu) {
    const double v = 1.0 - k * x * (n - mu);
    if (!(v > 0.0))
        throw std::domain_error("linearized gain coefficient nonpositive at n=" + std::to_string(n));
    return v;
}

// Coefficient tables indexed by level n = 1..D-1 (slot 0 unused). Tabulated
// once per model; all generator assembly reads these.
inline std::vector<double> gain_table(const LaserModel& m, Variant variant) {
    std::vector<double> g(m.dim, 0.0);
    for (int n = 1; n < m.dim; ++n) {
        g[n] = variant == Variant::Exact
                   ? gain_coefficient(n, m)
                   : std::sqrt(linearized_gain_sq(n - 1, m.k(), m.gain_x(), m.mu()));
    }
    return g;
}

inline std::vector<double> loss_table(const LaserModel& m, Variant variant) {
    std::vector<double> l(m.dim, 0.0);
    for (int n = 1; n < m.dim; ++n) {
        l[n] = variant == Variant::Exact
                   ? loss_coefficient(n, m)
                   : std::sqrt(linearized_loss_sq(n, m.k(), m.loss_x(), m.mu()));
    }
    return l;
}

// Flux normalization 1 / sum_n L_n^2 rho_n over n = 1..D-1, computed from the
// realized steady state so finite-D results are exactly flux normalized.
inline double normalization_r(const LaserModel& m, const NumberDistribution& steady,
                              Variant variant = Variant::Exact) {
    if (steady.dim() != m.dim) throw std::domain_error("steady state dimension mismatch");
    const auto L = loss_table(m, variant);
    double s = 0.0;
    for (int n = 1; n < m.dim; ++n) s += L[n] * L[n] * steady.weights[n];
    if (!(std::abs(s) > 1e-300)) throw std::domain_error("degenerate model: zero loss weight");
    return 1.0 / s;
}

}  // namespace lasercoh
