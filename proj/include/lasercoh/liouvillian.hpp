#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "lasercoh/banded.hpp"
#include "lasercoh/model.hpp"

namespace lasercoh {

// Normalization factors entering the generator. r scales the whole
// lambda-family generator; r_prime scales only the loss term of the
// q-family. Both are computed self-consistently from the realized steady
// state (see LaserSystem); raw assembly accepts them explicitly.
struct SectorScale {
    double r = 1.0;
    double r_prime = 1.0;
};

// Generator of the master equation restricted to the diagonal offset
// s = m - n. Every jump term shifts both matrix indices equally, so offsets
// never mix, and the operators for +s and -s coincide because all
// coefficients are real and symmetric under m <-> n.
//
// Assembly for the vector v_j = rho_{j+s, j}, 0 <= j < D - |s|:
//   gain in-flow   G_m G_n        from v_{j-1}
//   loss in-flow   L_{m+1} L_{n+1} from v_{j+1}
//   out-flow     -(GdG_m + GdG_n)/2 - (LdL_m + LdL_n)/2 on the diagonal,
// where GdG/LdL are the diagonals of G^dag G and L^dag L (zero at the top
// respectively bottom level). The q-family replaces the gain part with
// M_g + (q/2) M_g^2, the exact square of its flat-gain dissipator, which
// populates the -2 band and preserves the trace identically.
inline SectorOperator build_sector_raw(const LaserModel& model, int s_in, Variant variant,
                                       SectorScale scale = {}) {
    model.validate();
    const int D = model.dim;
    if (std::abs(s_in) >= D) throw std::domain_error("sector offset |s| must be < D");
    const int s = std::abs(s_in);
    const int n = D - s;

    const auto G = gain_table(model, variant);
    const auto L = loss_table(model, variant);
    auto gdg = [&](int m) { return m <= D - 2 ? G[m + 1] * G[m + 1] : 0.0; };
    auto ldl = [&](int m) { return m >= 1 ? L[m] * L[m] : 0.0; };

    SectorOperator op;
    op.s = s_in;
    op.resize(n);

    if (model.family == Family::PQ) {
        // Flat-gain dissipator M_g: unit sub-diagonal plus its out-flow diagonal.
        std::vector<double> d(n);
        for (int j = 0; j < n; ++j) d[j] = -0.5 * (gdg(j + s) + gdg(j));
        const double half_q = 0.5 * model.q;
        for (int j = 0; j < n; ++j) {
            if (j >= 2) op.at(j, -2) = half_q;  // (M_g^2)_{j,j-2} = 1
            if (j >= 1) op.at(j, -1) = 1.0 + half_q * (d[j] + d[j - 1]);
            op.at(j, 0) = d[j] + half_q * d[j] * d[j]
                          - scale.r_prime * 0.5 * (ldl(j + s) + ldl(j));
            if (j + 1 < n) op.at(j, 1) = scale.r_prime * L[j + s + 1] * L[j + 1];
        }
        for (auto& band : op.bands)
            for (double& v : band) v *= model.flux;
    } else {
        for (int j = 0; j < n; ++j) {
            if (j >= 1) op.at(j, -1) = G[j + s] * G[j];
            op.at(j, 0) = -0.5 * (gdg(j + s) + gdg(j)) - 0.5 * (ldl(j + s) + ldl(j));
            if (j + 1 < n) op.at(j, 1) = L[j + s + 1] * L[j + 1];
        }
        const double c = scale.r * model.flux;
        for (auto& band : op.bands)
            for (double& v : band) v *= c;
    }
    return op;
}

namespace detail {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-stacked dissipator of a real jump operator c:
//   vec(c rho c^T) - (1/2) vec(c^T c rho + rho c^T c).
inline Eigen::MatrixXd dense_dissipator(const Eigen::MatrixXd& c) {
    const int D = static_cast<int>(c.rows());
    const Eigen::MatrixXd h = c.transpose() * c;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(D, D);
    return kron(c, c) - 0.5 * (kron(id, h) + kron(h, id));
}

}  // namespace detail

// Dense D^2 x D^2 superoperator built directly from the jump operators with
// Kronecker products (column-stacking convention: vec index of rho_{m,n} is
// n*D + m). Oracle for small-D validation only; never on performance paths.
inline Eigen::MatrixXd dense_superoperator(const LaserModel& model, Variant variant,
                                           SectorScale scale = {}) {
    model.validate();
    const int D = model.dim;
    if (D > 8) throw std::domain_error("dense superoperator is restricted to D <= 8");

    const auto Gt = gain_table(model, variant);
    const auto Lt = loss_table(model, variant);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D), L = Eigen::MatrixXd::Zero(D, D);
    for (int n = 1; n < D; ++n) {
        G(n, n - 1) = Gt[n];
        L(n - 1, n) = Lt[n];
    }
    if (model.family == Family::PQ) {
        const Eigen::MatrixXd dg = detail::dense_dissipator(G);
        return model.flux * (dg + 0.5 * model.q * dg * dg +
                             scale.r_prime * detail::dense_dissipator(L));
    }
    return scale.r * model.flux *
           (detail::dense_dissipator(G) + detail::dense_dissipator(L));
}

// The same dense superoperator assembled from the banded sectors; used to
// cross-check the sector decomposition entry by entry.
inline Eigen::MatrixXd dense_from_sectors(const LaserModel& model, Variant variant,
                                          SectorScale scale = {}) {
    const int D = model.dim;
    if (D > 8) throw std::domain_error("dense superoperator is restricted to D <= 8");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(D * D, D * D);
    for (int s = -(D - 1); s <= D - 1; ++s) {
        const auto op = build_sector_raw(model, s, variant, scale);
        for (int j = 0; j < op.dim; ++j) {
            const int m = s >= 0 ? j + s : j;
            const int n = s >= 0 ? j : j - s;
            for (int b = 0; b < 5; ++b) {
                const int i = j + SectorOperator::offset_of(b);
                if (i < 0 || i >= op.dim) continue;
                const int mi = s >= 0 ? i + s : i;
                const int ni = s >= 0 ? i : i - s;
                out(n * D + m, ni * D + mi) = op.bands[b][j];
            }
        }
    }
    return out;
}

}  // namespace lasercoh
