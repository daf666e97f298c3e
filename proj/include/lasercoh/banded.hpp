#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "lasercoh/errors.hpp"

namespace lasercoh {

// Banded real operator acting on one density-matrix diagonal (offset
// s = m - n). Row j couples to entries j-2..j+2; bands[b][j] is the
// coefficient of v[j + b - 2]. Nearest-neighbor generators leave the +/-2
// bands zero; the sub-Poissonian pump populates the -2 band. Entries carry
// units of 1/time. Immutable after assembly; apply is reentrant.
struct SectorOperator {
    int s = 0;
    int dim = 0;
    std::array<std::vector<double>, 5> bands;

    static constexpr int offset_of(int b) { return b - 2; }

    void resize(int n) {
        dim = n;
        for (auto& band : bands) band.assign(n, 0.0);
    }

    double& at(int j, int off) { return bands[off + 2][j]; }
    double at(int j, int off) const { return bands[off + 2][j]; }

    template <class Scalar>
    void apply_to(const Scalar* v, Scalar* out) const {
        for (int j = 0; j < dim; ++j) {
            Scalar acc = bands[2][j] * v[j];
            if (j >= 2) acc += bands[0][j] * v[j - 2];
            if (j >= 1) acc += bands[1][j] * v[j - 1];
            if (j + 1 < dim) acc += bands[3][j] * v[j + 1];
            if (j + 2 < dim) acc += bands[4][j] * v[j + 2];
            out[j] = acc;
        }
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        if (static_cast<int>(v.size()) != dim)
            throw std::domain_error("sector apply: length mismatch");
        std::vector<double> out(dim);
        apply_to(v.data(), out.data());
        return out;
    }

    std::vector<std::complex<double>> apply(const std::vector<std::complex<double>>& v) const {
        if (static_cast<int>(v.size()) != dim)
            throw std::domain_error("sector apply: length mismatch");
        std::vector<std::complex<double>> out(dim);
        apply_to(v.data(), out.data());
        return out;
    }

    double inf_norm() const {
        double best = 0.0;
        for (int j = 0; j < dim; ++j) {
            double row = 0.0;
            for (int b = 0; b < 5; ++b) row += std::abs(bands[b][j]);
            best = std::max(best, row);
        }
        return best;
    }

    double max_abs_diag() const {
        double best = 0.0;
        for (int j = 0; j < dim; ++j) best = std::max(best, std::abs(bands[2][j]));
        return best;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        for (int j = 0; j < dim; ++j)
            for (int b = 0; b < 5; ++b) {
                const int i = j + offset_of(b);
                if (i >= 0 && i < dim) m(j, i) = bands[b][j];
            }
        return m;
    }

    template <class Scalar>
    Eigen::SparseMatrix<Scalar> sparse(Scalar diag_shift = Scalar(0)) const {
        std::vector<Eigen::Triplet<Scalar>> trips;
        trips.reserve(static_cast<size_t>(dim) * 5);
        for (int j = 0; j < dim; ++j)
            for (int b = 0; b < 5; ++b) {
                const int i = j + offset_of(b);
                if (i < 0 || i >= dim) continue;
                Scalar v = Scalar(bands[b][j]);
                if (i == j) v += diag_shift;
                if (v != Scalar(0)) trips.emplace_back(j, i, v);
            }
        Eigen::SparseMatrix<Scalar> sp(dim, dim);
        sp.setFromTriplets(trips.begin(), trips.end());
        return sp;
    }
};

// Contiguous index range [lo, hi] kept active in a solve or propagation.
struct IndexWindow {
    int lo = 0;
    int hi = -1;
    int size() const { return hi - lo + 1; }
    bool covers(int dim) const { return lo == 0 && hi == dim - 1; }
};

// Smallest contiguous window containing every entry of ref above
// tau_rel * max(ref), expanded by margin on both sides. The generators in
// this library develop huge rates only in index regions carrying negligible
// weight, so restricting work to this window bounds both cost and stiffness
// while the dropped mass stays below tau_rel.
inline IndexWindow mass_window(const std::vector<double>& ref, double tau_rel, int margin) {
    const int n = static_cast<int>(ref.size());
    IndexWindow w{0, n - 1};
    if (tau_rel <= 0.0 || n == 0) return w;
    double peak = 0.0;
    for (double x : ref) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) return w;
    const double cut = tau_rel * peak;
    int lo = 0, hi = n - 1;
    while (lo < n && std::abs(ref[lo]) < cut) ++lo;
    while (hi >= 0 && std::abs(ref[hi]) < cut) --hi;
    if (lo > hi) return w;
    w.lo = std::max(0, lo - margin);
    w.hi = std::min(n - 1, hi + margin);
    return w;
}

// Submatrix on a window; couplings across the cut are dropped (absorbing
// truncation).
inline SectorOperator restrict_to(const SectorOperator& op, const IndexWindow& w) {
    if (w.covers(op.dim)) return op;
    SectorOperator out;
    out.s = op.s;
    out.resize(w.size());
    for (int j = 0; j < out.dim; ++j)
        for (int b = 0; b < 5; ++b) {
            const int i = j + SectorOperator::offset_of(b);
            if (i < 0 || i >= out.dim) continue;
            out.bands[b][j] = op.bands[b][j + w.lo];
        }
    return out;
}

inline std::vector<double> restrict_to(const std::vector<double>& v, const IndexWindow& w) {
    return std::vector<double>(v.begin() + w.lo, v.begin() + w.hi + 1);
}

inline void embed_into(const std::vector<double>& small, const IndexWindow& w,
                       std::vector<double>& full) {
    std::fill(full.begin(), full.end(), 0.0);
    std::copy(small.begin(), small.end(), full.begin() + w.lo);
}

namespace detail {

// Row scales 1/max|row| (rows are wildly uneven for sharp models; scaling
// keeps the LU factors balanced without changing solutions or null spaces).
inline std::vector<double> row_scales(const SectorOperator& op) {
    std::vector<double> sc(op.dim, 1.0);
    for (int j = 0; j < op.dim; ++j) {
        double m = 0.0;
        for (int b = 0; b < 5; ++b) m = std::max(m, std::abs(op.bands[b][j]));
        if (m > 0.0) sc[j] = 1.0 / m;
    }
    return sc;
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> scaled_sparse(const SectorOperator& op, Scalar shift,
                                          const std::vector<double>& sc) {
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(static_cast<size_t>(op.dim) * 5);
    for (int j = 0; j < op.dim; ++j)
        for (int b = 0; b < 5; ++b) {
            const int i = j + SectorOperator::offset_of(b);
            if (i < 0 || i >= op.dim) continue;
            Scalar v = Scalar(op.bands[b][j]);
            if (i == j) v -= shift;
            if (v != Scalar(0)) trips.emplace_back(j, i, Scalar(sc[j]) * v);
        }
    Eigen::SparseMatrix<Scalar> sp(op.dim, op.dim);
    sp.setFromTriplets(trips.begin(), trips.end());
    return sp;
}

}  // namespace detail

// Solve (A - shift I) x = b with row equilibration, one iterative-refinement
// pass, and a residual gate.
template <class Scalar>
std::vector<Scalar> solve_shifted(const SectorOperator& op, Scalar shift,
                                  const std::vector<Scalar>& b, double rel_tol = 1e-8) {
    if (static_cast<int>(b.size()) != op.dim)
        throw std::domain_error("solve_shifted: rhs length mismatch");
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const auto sc = detail::row_scales(op);
    auto sp = detail::scaled_sparse<Scalar>(op, shift, sc);
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(sp);
    if (lu.info() != Eigen::Success) throw NumericError("sparse LU factorization failed");

    Vec rhs(op.dim);
    for (int j = 0; j < op.dim; ++j) rhs[j] = Scalar(sc[j]) * b[j];
    Vec x = lu.solve(rhs);

    auto residual = [&](const Vec& xv) {
        std::vector<Scalar> xs(xv.data(), xv.data() + op.dim);
        auto ax = op.apply(xs);
        double rn = 0.0, bn = 0.0, xn = 0.0;
        for (int j = 0; j < op.dim; ++j) {
            rn = std::max(rn, std::abs(ax[j] - shift * xs[j] - b[j]) * sc[j]);
            bn = std::max(bn, std::abs(b[j]) * sc[j]);
            xn = std::max(xn, std::abs(xs[j]));
        }
        return rn / std::max(bn + xn, 1e-300);
    };

    double res = residual(x);
    if (res > rel_tol) {
        // one refinement step with the existing factorization
        std::vector<Scalar> xs(x.data(), x.data() + op.dim);
        auto ax = op.apply(xs);
        Vec r(op.dim);
        for (int j = 0; j < op.dim; ++j) r[j] = Scalar(sc[j]) * (b[j] - (ax[j] - shift * xs[j]));
        x += lu.solve(r);
        res = residual(x);
        if (res > rel_tol) throw NumericError("banded solve did not reach tolerance", res);
    }
    return std::vector<Scalar>(x.data(), x.data() + op.dim);
}

// Solve A x = b on the complement of a known one-dimensional null space.
// null_vec spans the right null space; the left null vector is the all-ones
// trace functional. The bordered system [A, null; 1^T, 0] is regular and
// pins 1^T x = 0.
inline std::vector<double> solve_deflated(const SectorOperator& op,
                                          const std::vector<double>& null_vec,
                                          const std::vector<double>& b) {
    const int n = op.dim;
    if (static_cast<int>(b.size()) != n || static_cast<int>(null_vec.size()) != n)
        throw std::domain_error("solve_deflated: length mismatch");
    auto sc = detail::row_scales(op);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) * 7);
    for (int j = 0; j < n; ++j) {
        for (int bnd = 0; bnd < 5; ++bnd) {
            const int i = j + SectorOperator::offset_of(bnd);
            if (i < 0 || i >= n) continue;
            const double v = op.bands[bnd][j];
            if (v != 0.0) trips.emplace_back(j, i, sc[j] * v);
        }
        trips.emplace_back(j, n, sc[j] * null_vec[j]);
        trips.emplace_back(n, j, 1.0);
    }
    Eigen::SparseMatrix<double> sp(n + 1, n + 1);
    sp.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sp);
    if (lu.info() != Eigen::Success) throw NumericError("deflated LU factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (int j = 0; j < n; ++j) rhs[j] = sc[j] * b[j];
    Eigen::VectorXd x = lu.solve(rhs);
    return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace lasercoh
