#pragma once

#include <Eigen/Dense>

#include "otadpd/gmp.hpp"
#include "otadpd/mlp.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

enum class DpdKind { Gmp, R2Tdnn };

// Predistorter x = scale * f(u). f works on u / amplitude_ref and its output is
// scaled back by amplitude_ref, so the parameters stay O(1) for any drive.
// GMP parameters: coefficient c_i stored as theta[2i] = Re, theta[2i+1] = Im.
// R2TDNN: window (u[n], u[n-1], .., u[n-K1]) interleaved re/im -> 12 -> 12 -> 2,
// plus (Re u[n], Im u[n]) added to the output.
struct DpdModel {
    DpdKind kind = DpdKind::Gmp;
    int K1 = 3;
    GmpConfig cfg;
    MlpShape net;
    RVec theta;
    double amplitude_ref = 1.0;
    // > 0: use this normalization scale; 0: recompute per batch.
    double frozen_scale = 0.0;

    std::size_t param_count() const { return theta.size(); }
    void validate() const;
    CVec gmp_coeffs() const;
    void set_gmp_coeffs(const CVec& c);
};

DpdModel make_gmp_dpd(const GmpConfig& cfg, double amplitude_ref = 1.0);  // identity
DpdModel make_r2tdnn_dpd(int K1, Rng& rng, double amplitude_ref = 1.0);    // identity, random hidden layers

// f(u) before normalization.
CVec dpd_raw(const CVec& u, const DpdModel& m);

// sqrt(mean|u|^2 / mean|raw|^2)
double normalization_scale(const CVec& u, const CVec& raw);

// Applies the model's frozen scale if set, the batch scale otherwise.
ComplexSignal dpd_forward(const ComplexSignal& u, const DpdModel& m, double* scale_used = nullptr);

using Jacobian = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// d(Re x[n], Im x[n]) / d theta with the normalization scale held constant.
Jacobian dpd_param_jacobian(const CVec& u, std::size_t n, const DpdModel& m, double scale);

// sum_n Re( conj(w[n]) * d raw[n] / d theta ).
RVec dpd_raw_vjp(const CVec& u, const DpdModel& m, const CVec& w);

}  // namespace otadpd

namespace otadpd {

// Sparse variants: raw output and VJP restricted to sample indices idx.
CVec dpd_raw(const CVec& u, const DpdModel& m, const std::vector<std::size_t>& idx);
RVec dpd_raw_vjp(const CVec& u, const DpdModel& m, const std::vector<std::size_t>& idx, const CVec& w);

}  // namespace otadpd
