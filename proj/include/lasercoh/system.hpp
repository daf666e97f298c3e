#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lasercoh/liouvillian.hpp"
#include "lasercoh/model.hpp"
#include "lasercoh/steady_state.hpp"

namespace lasercoh {

// A model bound to its realized steady state and flux normalization.
// Sectors built through here carry the final scale factors. Immutable after
// construction; safe to share across threads.
class LaserSystem {
  public:
    explicit LaserSystem(const LaserModel& model, Variant variant = Variant::Exact)
        : model_(model), variant_(variant) {
        model_.validate();
        steady_ = numeric_steady_state(model_, variant_, &report_);
        loss_norm_ = normalization_r(model_, steady_, variant_);
        if (model_.family == Family::PQ) {
            scale_.r = 1.0;
            scale_.r_prime = report_.r_prime;
        } else {
            scale_.r = loss_norm_;
            scale_.r_prime = 1.0;
        }
        gain_ = gain_table(model_, variant_);
        loss_ = loss_table(model_, variant_);
    }

    const LaserModel& model() const { return model_; }
    Variant variant() const { return variant_; }
    const NumberDistribution& steady() const { return steady_; }
    const SteadySolveReport& solve_report() const { return report_; }
    const std::vector<double>& gain() const { return gain_; }
    const std::vector<double>& loss() const { return loss_; }

    // 1 / sum L_n^2 rho_n over the final steady state. Also the generator
    // scale r for the lambda family; for the q family the generator keeps
    // the self-consistent r' while contractions use this value, the two
    // agree to better than 1e-6.
    double loss_norm() const { return loss_norm_; }
    double r() const { return scale_.r; }
    double r_prime() const { return scale_.r_prime; }

    SectorOperator sector(int s) const { return build_sector_raw(model_, s, variant_, scale_); }

    // Apply the generator to a density matrix, one diagonal at a time.
    // Hermitian input yields Hermitian output because the +s and -s sectors
    // coincide and all coefficients are real.
    Eigen::MatrixXcd apply_to_state(const Eigen::MatrixXcd& rho) const {
        const int D = model_.dim;
        if (rho.rows() != D || rho.cols() != D)
            throw std::domain_error("apply_to_state: state dimension mismatch");
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D, D);
        std::vector<std::complex<double>> v, w;
        for (int s = -(D - 1); s <= D - 1; ++s) {
            const auto op = sector(s);
            const int n = op.dim;
            v.resize(n);
            w.resize(n);
            for (int j = 0; j < n; ++j) v[j] = s >= 0 ? rho(j + s, j) : rho(j, j - s);
            op.apply_to(v.data(), w.data());
            for (int j = 0; j < n; ++j) {
                if (s >= 0)
                    out(j + s, j) = w[j];
                else
                    out(j, j - s) = w[j];
            }
        }
        return out;
    }

  private:
    LaserModel model_;
    Variant variant_;
    NumberDistribution steady_;
    SteadySolveReport report_;
    SectorScale scale_;
    double loss_norm_ = 1.0;
    std::vector<double> gain_, loss_;
};

// Convenience wrapper matching the free-function surface; builds the full
// normalization state behind the scenes, so prefer LaserSystem in loops.
inline SectorOperator build_sector(const LaserModel& model, int s, Variant variant) {
    return LaserSystem(model, variant).sector(s);
}

inline Eigen::MatrixXcd apply_to_state(const LaserModel& model, const Eigen::MatrixXcd& rho,
                                       Variant variant) {
    return LaserSystem(model, variant).apply_to_state(rho);
}

}  // namespace lasercoh
