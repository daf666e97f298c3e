#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lasercoh/analytics.hpp"
#include "lasercoh/propagate.hpp"
#include "lasercoh/system.hpp"

namespace lasercoh {

enum class SeriesKind { G1, G2, SpectrumI, MandelQ };

inline std::string to_string(SeriesKind k) {
    switch (k) {
        case SeriesKind::G1: return "g1";
        case SeriesKind::G2: return "g2";
        case SeriesKind::SpectrumI: return "spectrum_i";
        default: return "mandel_q";
    }
}

// One observable on a time or angular-frequency grid.
struct CorrelationSeries {
    SeriesKind kind = SeriesKind::G1;
    LaserModel model;
    double flux = 1.0;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<int> failed;  // grid indices whose solve failed (normally empty)

    void validate() const {
        for (size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw std::domain_error("series grid must increase strictly");
        for (size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]) &&
                std::find(failed.begin(), failed.end(), static_cast<int>(i)) == failed.end())
                throw NumericError("series contains a non-finite value at index " +
                                   std::to_string(i));
    }
};

inline std::vector<double> geometric_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    const double f = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(f * i);
    g.back() = hi;
    return g;
}

// 0 followed by geometric spacing over [1e-3, 50]/(flux k).
inline std::vector<double> default_time_grid(const LaserModel& m, int points = 400) {
    const double scale = 1.0 / (m.flux * m.k());
    auto g = geometric_grid(1e-3 * scale, 50.0 * scale, points);
    g.insert(g.begin(), 0.0);
    return g;
}

// Linear grid over [0, 20 flux k].
inline std::vector<double> default_omega_grid(const LaserModel& m, int points = 200) {
    const double hi = 20.0 * m.flux * m.k();
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = hi * i / (points - 1);
    return g;
}

namespace detail {

struct G1Setup {
    SectorOperator op;              // offset -1 sector
    std::vector<double> v0;         // L rho_ss on that diagonal
    std::vector<double> weights;    // L^dag contraction
    std::vector<double> ref;        // window reference profile
    double prefactor = 1.0;         // flux * loss normalization
};

inline G1Setup g1_setup(const LaserSystem& sys) {
    const int D = sys.model().dim;
    const auto& rho = sys.steady().weights;
    // window reference from the closed-form profile, which has clean tails
    const auto prof = exact_steady_state(D, sys.model().p).weights;
    const auto& L = sys.loss();
    G1Setup s;
    s.op = sys.sector(-1);
    s.v0.resize(D - 1);
    s.weights.resize(D - 1);
    s.ref.resize(D - 1);
    for (int j = 0; j < D - 1; ++j) {
        s.v0[j] = L[j + 1] * rho[j + 1];
        s.weights[j] = L[j + 1];
        s.ref[j] = std::max(prof[j], prof[j + 1]);
    }
    s.prefactor = sys.model().flux * sys.loss_norm();
    return s;
}

struct G2Setup {
    SectorOperator op;            // diagonal sector
    std::vector<double> v0;       // conditional state after one detection, unit sum
    std::vector<double> weights;  // L^dag L contraction
    std::vector<double> ref;
    double prefactor = 1.0;       // loss normalization
};

inline G2Setup g2_setup(const LaserSystem& sys) {
    const int D = sys.model().dim;
    const auto& rho = sys.steady().weights;
    const auto& L = sys.loss();
    G2Setup s;
    s.op = sys.sector(0);
    s.v0.assign(D, 0.0);
    s.weights.assign(D, 0.0);
    double total = 0.0;
    for (int m = 0; m + 1 < D; ++m) {
        s.v0[m] = L[m + 1] * L[m + 1] * rho[m + 1];
        total += s.v0[m];
    }
    if (!(std::abs(total) > 1e-300)) throw std::domain_error("degenerate conditional state");
    for (double& v : s.v0) v /= total;
    for (int m = 1; m < D; ++m) s.weights[m] = L[m] * L[m];
    s.ref = exact_steady_state(D, sys.model().p).weights;
    s.prefactor = sys.loss_norm();
    return s;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y, size_t lo,
                        size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i + 1 <= hi; ++i)
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    return acc;
}

// Composite Simpson on a uniform grid (count must be odd).
inline double simpson_uniform(double h, const std::vector<double>& y) {
    const size_t n = y.size();
    double acc = y.front() + y.back();
    for (size_t i = 1; i + 1 < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * y[i];
    return acc * h / 3.0;
}

}  // namespace detail

// First-order coherence function G1(t) = prefactor * L^dag contraction of the
// propagated L rho_ss vector in the offset -1 sector. Values are real for
// these purely dissipative models; G1(0) equals the flux by construction of
// the normalization.
inline CorrelationSeries g1(const LaserSystem& sys, const std::vector<double>& t_grid,
                            PropagateOptions opt = {}) {
    auto s = detail::g1_setup(sys);
    opt.window_ref = &s.ref;
    CorrelationSeries out;
    out.kind = SeriesKind::G1;
    out.model = sys.model();
    out.flux = sys.model().flux;
    out.grid = t_grid;
    out.values = propagate_contraction(s.op, s.v0, s.weights, t_grid, opt);
    for (double& v : out.values) v *= s.prefactor;
    out.validate();
    return out;
}

// Photon pair correlation g2(t): the conditional diagonal state after one
// detection propagated in the s = 0 sector and contracted against L^dag L.
inline CorrelationSeries g2(const LaserSystem& sys, const std::vector<double>& t_grid,
                            PropagateOptions opt = {}) {
    auto s = detail::g2_setup(sys);
    opt.window_ref = &s.ref;
    CorrelationSeries out;
    out.kind = SeriesKind::G2;
    out.model = sys.model();
    out.flux = sys.model().flux;
    out.grid = t_grid;
    out.values = propagate_contraction(s.op, s.v0, s.weights, t_grid, opt);
    for (double& v : out.values) v *= s.prefactor;
    out.validate();
    return out;
}

// Coherence via the resolvent: minus the inverse of the offset -1 sector
// applied to the initial vector, doubled for the two time orientations.
inline double coherence_resolvent(const LaserSystem& sys) {
    auto s = detail::g1_setup(sys);
    std::vector<double> rhs(s.v0.size());
    for (size_t j = 0; j < rhs.size(); ++j) rhs[j] = -s.v0[j];
    std::vector<double> x;
    try {
        x = solve_shifted<double>(s.op, 0.0, rhs);
    } catch (const NumericError& e) {
        throw NumericError(std::string("coherence solve failed (non-decaying G1?): ") + e.what());
    }
    double acc = 0.0;
    for (size_t j = 0; j < x.size(); ++j) acc += s.weights[j] * x[j];
    return 2.0 * s.prefactor * acc;
}

// Coherence as a time integral of G1 on an adaptive composite grid:
// geometric head through the photon-correlation regime, Simpson tail over
// the exponential decay. Independent of the resolvent algebra.
inline double coherence_time_integral(const LaserSystem& sys) {
    auto s = detail::g1_setup(sys);
    PropagateOptions opt;
    opt.window_ref = &s.ref;
    ModalPropagator modal(s.op, s.v0, opt);
    const double rate = modal.slowest_decay_rate();  // = ell/2 for these models
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw NumericError("G1 does not decay; coherence undefined", rate);

    const double k = sys.model().k() * sys.model().flux;
    const double head_lo = std::min(1e-4 / k, 0.01 / rate);
    const double seam = 1.0 / rate;
    const double tail_hi = 20.0 / rate;  // exp(-20) tail, far below 0.1%

    auto head = geometric_grid(head_lo, seam, 480);
    head.insert(head.begin(), 0.0);
    auto head_vals = modal.contraction(s.weights, head);
    double w0 = 0.0;
    for (size_t j = 0; j < s.v0.size(); ++j) w0 += s.weights[j] * s.v0[j];
    head_vals.front() = w0;

    const int tail_n = 1201;  // odd for Simpson
    const double h = (tail_hi - seam) / (tail_n - 1);
    std::vector<double> tail(tail_n);
    for (int i = 0; i < tail_n; ++i) tail[i] = seam + h * i;
    const auto tail_vals = modal.contraction(s.weights, tail);

    const double integral = detail::trapezoid(head, head_vals, 0, head.size() - 1) +
                            detail::simpson_uniform(h, tail_vals);
    return 2.0 * s.prefactor * integral;
}

// Resolvent coherence, cross-checked against the time integral when asked.
inline double coherence(const LaserSystem& sys, bool cross_check = true) {
    const double c = coherence_resolvent(sys);
    if (cross_check) {
        const double ci = coherence_time_integral(sys);
        const double rel = std::abs(c - ci) / std::max(std::abs(c), 1e-300);
        if (rel > 1e-3)
            throw NumericError("resolvent and time-integral coherence disagree", rel);
    }
    return c;
}

// Intensity noise spectrum by per-frequency resolvent solves in the diagonal
// sector. At omega = 0 the sector is singular with the steady state as null
// vector; the solve is deflated onto the trace-zero complement.
inline CorrelationSeries intensity_spectrum(const LaserSystem& sys,
                                            const std::vector<double>& omega_grid) {
    auto s = detail::g2_setup(sys);
    const auto& rho = sys.steady().weights;
    const int D = s.op.dim;
    std::vector<double> delta(D);
    for (int j = 0; j < D; ++j) delta[j] = s.v0[j] - rho[j];
    const double flux = sys.model().flux;

    CorrelationSeries out;
    out.kind = SeriesKind::SpectrumI;
    out.model = sys.model();
    out.flux = flux;
    out.grid = omega_grid;
    out.values.assign(omega_grid.size(), 0.0);

    std::vector<std::complex<double>> rhs_c(D), xc;
    for (size_t wi = 0; wi < omega_grid.size(); ++wi) {
        const double omega = omega_grid[wi];
        try {
            double re_sum = 0.0;
            if (omega == 0.0) {
                std::vector<double> rhs(D);
                for (int j = 0; j < D; ++j) rhs[j] = -delta[j];
                const auto x = solve_deflated(s.op, rho, rhs);
                for (int j = 0; j < D; ++j) re_sum += s.weights[j] * x[j];
            } else {
                for (int j = 0; j < D; ++j) rhs_c[j] = -delta[j];
                xc = solve_shifted<std::complex<double>>(s.op, {0.0, -omega}, rhs_c);
                std::complex<double> acc = 0.0;
                for (int j = 0; j < D; ++j) acc += s.weights[j] * xc[j];
                re_sum = acc.real();
            }
            out.values[wi] = flux + 2.0 * flux * flux * s.prefactor * re_sum;
        } catch (const NumericError&) {
            out.values[wi] = std::numeric_limits<double>::quiet_NaN();
            out.failed.push_back(static_cast<int>(wi));
        }
    }
    out.validate();
    return out;
}

// The same spectrum from the cosine transform of a g2 series on a uniform
// grid; the independent cross-check of the resolvent path.
inline CorrelationSeries intensity_spectrum_cosine(const LaserSystem& sys,
                                                   const std::vector<double>& omega_grid) {
    const LaserModel& m = sys.model();
    const double keff =
        m.k() * (m.family == Family::PQ ? 1.0 + 0.5 * m.q : 1.0) * m.flux;
    const double t_hi = 50.0 / keff;
    double omega_max = 0.0;
    for (double w : omega_grid) omega_max = std::max(omega_max, w);
    double h = 0.03 / keff;
    if (omega_max > 0.0) h = std::min(h, 2.0 * std::numbers::pi / omega_max / 24.0);
    int n = static_cast<int>(std::ceil(t_hi / h));
    if (n % 2) ++n;  // odd point count for Simpson
    h = t_hi / n;
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = h * i;

    const auto series = g2(sys, t);
    const double flux = m.flux;

    CorrelationSeries out;
    out.kind = SeriesKind::SpectrumI;
    out.model = m;
    out.flux = flux;
    out.grid = omega_grid;
    out.values.assign(omega_grid.size(), 0.0);
    std::vector<double> integrand(n + 1);
    for (size_t wi = 0; wi < omega_grid.size(); ++wi) {
        const double omega = omega_grid[wi];
        for (int i = 0; i <= n; ++i)
            integrand[i] = std::cos(omega * t[i]) * (series.values[i] - 1.0);
        out.values[wi] = flux + 2.0 * flux * flux * detail::simpson_uniform(h, integrand);
    }
    out.validate();
    return out;
}

// Windowed photocount statistic
//   Q_t = (2 flux / t) * int_0^t (t - u)(g2(u) - 1) du,
// evaluated by composite quadrature on refining uniform grids until the
// value settles to 1e-3.
inline double mandel_q(const LaserSystem& sys, double t, PropagateOptions opt = {}) {
    if (!(t > 0.0)) throw std::domain_error("mandel_q requires t > 0");
    const double flux = sys.model().flux;
    double prev = 0.0;
    for (int n = 800;; n *= 2) {
        const int pts = n + 1;
        const double h = t / n;
        std::vector<double> grid(pts);
        for (int i = 0; i < pts; ++i) grid[i] = h * i;
        const auto series = g2(sys, grid, opt);
        std::vector<double> integrand(pts);
        for (int i = 0; i < pts; ++i)
            integrand[i] = (t - grid[i]) * (series.values[i] - 1.0);
        const double q = 2.0 * flux / t * detail::simpson_uniform(h, integrand);
        if (n > 800 && std::abs(q - prev) < 1e-3) return q;
        if (n >= 12800) throw NumericError("mandel_q quadrature did not settle", std::abs(q - prev));
        prev = q;
    }
}

// Least-squares exponential decay rate of |values| over [t_lo, t_hi].
inline double fit_decay_rate(const CorrelationSeries& s, double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < s.grid.size(); ++i) {
        const double t = s.grid[i];
        if (t < t_lo || t > t_hi) continue;
        const double v = std::abs(s.values[i]);
        if (!(v > 0.0)) continue;
        const double y = std::log(v);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    if (n < 2) throw std::domain_error("fit window contains fewer than two samples");
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

}  // namespace lasercoh
