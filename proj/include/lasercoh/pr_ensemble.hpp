#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "lasercoh/distribution.hpp"
#include "lasercoh/system.hpp"

namespace lasercoh {

// Pure cavity state with a definite phase: entries sqrt(rho_m rho_n)
// exp(i phi (m-n)). Rank one with the given number distribution on the
// diagonal; the uniform phase mixture reproduces the diagonal steady state.
struct PhaseState {
    NumberDistribution dist;
    double phi = 0.0;
    Eigen::MatrixXcd rho;
};

inline PhaseState pure_phase_state(const NumberDistribution& dist, double phi) {
    const int D = dist.dim();
    std::vector<double> amp(D);
    for (int n = 0; n < D; ++n) {
        if (dist.weights[n] < 0.0)
            throw std::domain_error("pure_phase_state requires nonnegative weights");
        amp[n] = std::sqrt(dist.weights[n]);
    }
    PhaseState st;
    st.dist = dist;
    st.phi = phi;
    st.rho.resize(D, D);
    for (int m = 0; m < D; ++m)
        for (int n = 0; n < D; ++n)
            st.rho(m, n) = std::polar(amp[m] * amp[n], phi * (m - n));
    return st;
}

// Second derivative of the phase state with respect to its phase:
// entrywise -(m-n)^2 times the state.
inline Eigen::MatrixXcd second_phase_derivative(const NumberDistribution& dist, double phi) {
    auto st = pure_phase_state(dist, phi);
    const int D = dist.dim();
    for (int m = 0; m < D; ++m)
        for (int n = 0; n < D; ++n) st.rho(m, n) *= -double(m - n) * double(m - n);
    return st.rho;
}

namespace detail {

struct DiffusionMatrices {
    Eigen::MatrixXcd curvature;  // d^2 rho / d phi^2
    Eigen::MatrixXcd generated;  // L rho
    double clamped_mass = 0.0;
};

inline DiffusionMatrices diffusion_matrices(const LaserSystem& sys, double phi) {
    // Sub-Poissonian pumps can leave tiny negative tail weights which would
    // break the square roots; clamp and carry the removed mass.
    const auto clamped = clamp_negative_weights(sys.steady());
    DiffusionMatrices out;
    out.clamped_mass = clamped.clamped_mass;
    const auto state = pure_phase_state(clamped.dist, phi);
    out.curvature = second_phase_derivative(clamped.dist, phi);
    out.generated = sys.apply_to_state(state.rho);
    return out;
}

}  // namespace detail

// Relative Hilbert-Schmidt distance between (ell/2) d^2 rho/d phi^2 and the
// generator applied to the phase state. Small values certify that the
// ensemble evolves by pure phase diffusion at rate ell. Phase independent;
// computed at phi = 0 by default.
inline double relative_distance(const LaserSystem& sys, double ell, double phi = 0.0) {
    const auto m = detail::diffusion_matrices(sys, phi);
    const double denom = m.generated.norm();
    if (!(denom > 0.0)) throw std::domain_error("generator annihilates the phase state");
    return (0.5 * ell * m.curvature - m.generated).norm() / denom;
}

// Diffusion rate minimizing the distance above, by least squares in ell:
// ell* = 2 <A, B> / <A, A> with A the curvature and B the generated matrix.
inline double best_match_ell(const LaserSystem& sys, double phi = 0.0) {
    const auto m = detail::diffusion_matrices(sys, phi);
    const double aa = m.curvature.squaredNorm();
    const double ab = (m.curvature.conjugate().cwiseProduct(m.generated)).sum().real();
    if (!(aa > 0.0)) throw std::domain_error("degenerate curvature matrix");
    return 2.0 * ab / aa;
}

// Mass removed when clamping the steady state for the phase-state ansatz;
// reported alongside sweep results for sub-Poissonian pumps.
inline double phase_state_clamped_mass(const LaserSystem& sys) {
    return clamp_negative_weights(sys.steady()).clamped_mass;
}

// Norm of the defect by which the phase state fails to be a loss-operator
// eigenstate: the amplitude stranded on the top level, sqrt(weights[D-1]).
inline double eigenstate_residual(const NumberDistribution& dist) {
    const double w = dist.weights.back();
    if (w < 0.0) throw std::domain_error("top-level weight is negative");
    return std::sqrt(w);
}

}  // namespace lasercoh
