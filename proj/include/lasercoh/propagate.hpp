#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "lasercoh/banded.hpp"
#include "lasercoh/errors.hpp"

namespace lasercoh {

enum class Integrator {
    Auto,   // RK45 when the stability-limited step count is affordable, else Modal
    RK45,   // adaptive explicit Dormand-Prince 5(4)
    Modal,  // dense eigendecomposition on the active window
};

struct PropagateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    Integrator method = Integrator::Auto;
    // Active-window policy: indices whose reference weight falls below
    // window_tau * max are truncated (margin rows kept as guard). The
    // generators grow rates like 2^p at the Hilbert-space edges while all
    // propagated states are exponentially localized, so this bounds the
    // stiffness explicit steppers see. <= 0 disables windowing.
    double window_tau = 1e-16;
    int window_margin = 8;
    const std::vector<double>* window_ref = nullptr;  // defaults to |v0|
    double max_explicit_steps = 5e5;  // Auto switchover point
};

namespace detail {

inline IndexWindow choose_window(const SectorOperator& op, const std::vector<double>& v0,
                                 const PropagateOptions& opt) {
    if (opt.window_tau <= 0.0) return IndexWindow{0, op.dim - 1};
    std::vector<double> ref(op.dim);
    for (int j = 0; j < op.dim; ++j) ref[j] = std::abs(v0[j]);
    if (opt.window_ref) {
        for (int j = 0; j < op.dim; ++j) ref[j] = std::max(ref[j], std::abs((*opt.window_ref)[j]));
    }
    return mass_window(ref, opt.window_tau, opt.window_margin);
}

// Stability-limited step estimate for an explicit 5(4) pair: the spectral
// radius is bounded by twice the largest diagonal rate for these
// diagonally dominant generators.
inline double explicit_step_estimate(const SectorOperator& op, double t_span) {
    const double radius = 2.0 * op.max_abs_diag();
    return radius * t_span / 2.8;
}

}  // namespace detail

// Eigendecomposition of a sector operator on its active window. Gives dense
// output at arbitrary times and cheap scalar contractions; the workhorse for
// horizons far beyond the reach of explicit stepping.
class ModalPropagator {
  public:
    ModalPropagator(const SectorOperator& op, const std::vector<double>& v0,
                    const PropagateOptions& opt = {}) {
        if (static_cast<int>(v0.size()) != op.dim)
            throw std::domain_error("modal propagator: state length mismatch");
        dim_ = op.dim;
        window_ = detail::choose_window(op, v0, opt);
        const auto opw = restrict_to(op, window_);
        const int n = opw.dim;
        Eigen::MatrixXd dense = opw.dense();
        Eigen::EigenSolver<Eigen::MatrixXd> es(dense);
        if (es.info() != Eigen::Success) throw NumericError("sector eigendecomposition failed");
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();

        Eigen::VectorXcd v0w(n);
        for (int j = 0; j < n; ++j) v0w[j] = v0[window_.lo + j];
        coeffs_ = evecs_.partialPivLu().solve(v0w);

        const double v0n = v0w.norm();
        recon_error_ = v0n > 0.0 ? (evecs_ * coeffs_ - v0w).norm() / v0n : 0.0;
        if (recon_error_ > 1e-7)
            throw NumericError("modal reconstruction of the initial state is inaccurate",
                               recon_error_);
        // growth beyond rounding means the decomposition cannot be trusted
        const double scale = dense.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i)
            if (evals_[i].real() > 1e-8 * std::max(scale, 1.0))
                throw NumericError("sector operator has a growing mode", evals_[i].real());
    }

    const IndexWindow& window() const { return window_; }
    double reconstruction_error() const { return recon_error_; }

    double slowest_decay_rate() const {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < evals_.size(); ++i) {
            const double r = -evals_[i].real();
            if (std::abs(coeffs_[i]) > 1e-13 && r > 1e-300) best = std::min(best, r);
        }
        return best;
    }

    // Series of w^T v(t) for a full-length weight vector.
    std::vector<double> contraction(const std::vector<double>& weights,
                                    const std::vector<double>& t_grid) const {
        Eigen::VectorXcd wv(evals_.size());
        Eigen::VectorXcd ww(window_.size());
        for (int j = 0; j < window_.size(); ++j) ww[j] = weights[window_.lo + j];
        wv = evecs_.transpose() * ww;
        std::vector<double> out(t_grid.size());
        for (size_t ti = 0; ti < t_grid.size(); ++ti) {
            std::complex<double> acc = 0.0;
            for (int i = 0; i < evals_.size(); ++i)
                acc += wv[i] * coeffs_[i] * std::exp(evals_[i] * t_grid[ti]);
            out[ti] = acc.real();
        }
        return out;
    }

    // Full state at one time, embedded back into the original index range.
    std::vector<double> state(double t) const {
        Eigen::VectorXcd amp(evals_.size());
        for (int i = 0; i < evals_.size(); ++i) amp[i] = coeffs_[i] * std::exp(evals_[i] * t);
        Eigen::VectorXcd vw = evecs_ * amp;
        std::vector<double> full(dim_, 0.0);
        for (int j = 0; j < window_.size(); ++j) full[window_.lo + j] = vw[j].real();
        return full;
    }

  private:
    int dim_ = 0;
    IndexWindow window_;
    Eigen::VectorXcd evals_;
    Eigen::MatrixXcd evecs_;
    Eigen::VectorXcd coeffs_;
    double recon_error_ = 0.0;
};

namespace detail {

inline std::vector<std::vector<double>> propagate_rk45(const SectorOperator& op,
                                                       const std::vector<double>& v0,
                                                       const std::vector<double>& t_grid,
                                                       const PropagateOptions& opt) {
    namespace ode = boost::numeric::odeint;
    using State = std::vector<double>;
    const IndexWindow w = choose_window(op, v0, opt);
    const SectorOperator opw = restrict_to(op, w);

    State x = restrict_to(v0, w);
    std::vector<std::vector<double>> out;
    out.reserve(t_grid.size());
    auto system = [&opw](const State& v, State& dvdt, double) {
        dvdt.resize(v.size());
        opw.apply_to(v.data(), dvdt.data());
    };
    auto observer = [&](const State& v, double) {
        std::vector<double> full(op.dim, 0.0);
        embed_into(v, w, full);
        out.push_back(std::move(full));
    };
    const double dt0 = t_grid.size() > 1 ? std::max(1e-6 * t_grid.back(), 1e-12) : 1e-6;
    auto stepper =
        ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    try {
        ode::integrate_times(stepper, system, x, t_grid.begin(), t_grid.end(), dt0, observer);
    } catch (const std::exception& e) {
        const double t_last = out.empty() ? 0.0 : t_grid[out.size() - 1];
        throw NumericError(std::string("time integration failed after t = ") +
                           std::to_string(t_last) + ": " + e.what());
    }
    if (out.size() != t_grid.size())
        throw NumericError("time integration stopped short", double(out.size()));
    // grid starts at zero: report the initial state verbatim
    out.front() = v0;
    return out;
}

}  // namespace detail

// v(t) on a grid solving dv/dt = op v, v(0) = v0. The grid must increase and
// start at 0.
inline std::vector<std::vector<double>> propagate(const SectorOperator& op,
                                                  const std::vector<double>& v0,
                                                  const std::vector<double>& t_grid,
                                                  const PropagateOptions& opt = {}) {
    if (static_cast<int>(v0.size()) != op.dim)
        throw std::domain_error("propagate: state length mismatch");
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw std::domain_error("propagate: time grid must start at 0");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::domain_error("propagate: time grid must increase strictly");

    Integrator method = opt.method;
    if (method == Integrator::Auto) {
        const IndexWindow w = detail::choose_window(op, v0, opt);
        const double est = detail::explicit_step_estimate(restrict_to(op, w), t_grid.back());
        method = est <= opt.max_explicit_steps ? Integrator::RK45 : Integrator::Modal;
    }
    if (method == Integrator::RK45) return detail::propagate_rk45(op, v0, t_grid, opt);

    ModalPropagator modal(op, v0, opt);
    std::vector<std::vector<double>> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(modal.state(t));
    out.front() = v0;
    return out;
}

// Contraction series weights^T v(t); avoids materializing every state when a
// modal decomposition is in play.
inline std::vector<double> propagate_contraction(const SectorOperator& op,
                                                 const std::vector<double>& v0,
                                                 const std::vector<double>& weights,
                                                 const std::vector<double>& t_grid,
                                                 const PropagateOptions& opt = {}) {
    Integrator method = opt.method;
    if (method == Integrator::Auto) {
        const IndexWindow w = detail::choose_window(op, v0, opt);
        const double est = detail::explicit_step_estimate(restrict_to(op, w), t_grid.back());
        method = est <= opt.max_explicit_steps ? Integrator::RK45 : Integrator::Modal;
    }
    if (method == Integrator::Modal) {
        ModalPropagator modal(op, v0, opt);
        auto out = modal.contraction(weights, t_grid);
        double w0 = 0.0;
        for (int j = 0; j < op.dim; ++j) w0 += weights[j] * v0[j];
        out.front() = w0;
        return out;
    }
    PropagateOptions o = opt;
    o.method = Integrator::RK45;
    const auto states = propagate(op, v0, t_grid, o);
    std::vector<double> out(t_grid.size(), 0.0);
    for (size_t ti = 0; ti < states.size(); ++ti)
        for (int j = 0; j < op.dim; ++j) out[ti] += weights[j] * states[ti][j];
    return out;
}

}  // namespace lasercoh
