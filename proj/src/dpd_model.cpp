#include "otadpd/dpd_model.hpp"

#include <algorithm>
#include <cmath>

#include "otadpd/rng.hpp"

namespace otadpd {

void DpdModel::validate() const {
    if (K1 < 0) throw DomainError("DpdModel: negative memory length");
    if (!(amplitude_ref > 0.0)) throw DomainError("DpdModel: amplitude_ref must be positive");
    if (kind == DpdKind::Gmp) {
        cfg.validate();
        if (theta.size() != 2 * cfg.basis_count()) throw DomainError("DpdModel: GMP parameter count mismatch");
    } else {
        if (net.widths.size() < 2 || net.inputs() != 2 * (K1 + 1) || net.outputs() != 2)
            throw DomainError("DpdModel: R2TDNN widths do not match K1");
        if (theta.size() != net.param_count()) throw DomainError("DpdModel: R2TDNN parameter count mismatch");
    }
}

CVec DpdModel::gmp_coeffs() const {
    CVec c(theta.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = {theta[2 * i], theta[2 * i + 1]};
    return c;
}

void DpdModel::set_gmp_coeffs(const CVec& c) {
    theta.resize(2 * c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        theta[2 * i] = c[i].real();
        theta[2 * i + 1] = c[i].imag();
    }
}

DpdModel make_gmp_dpd(const GmpConfig& cfg, double amplitude_ref) {
    DpdModel m;
    m.kind = DpdKind::Gmp;
    m.cfg = cfg;
    m.K1 = std::max({cfg.La - 1, cfg.Lb - 1 + cfg.Mb, cfg.Lc - 1});
    m.amplitude_ref = amplitude_ref;
    CVec c(cfg.basis_count(), 0.0);
    c[0] = 1.0;
    m.set_gmp_coeffs(c);
    m.validate();
    return m;
}

DpdModel make_r2tdnn_dpd(int K1, Rng& rng, double amplitude_ref) {
    DpdModel m;
    m.kind = DpdKind::R2Tdnn;
    m.K1 = K1;
    m.net.widths = {2 * (K1 + 1), 12, 12, 2};
    m.theta = mlp_init(m.net, rng, true);
    m.amplitude_ref = amplitude_ref;
    m.validate();
    return m;
}

namespace {

void window_input(const CVec& u, std::size_t n, int K1, double inv_ref, double* in) {
    for (int k = 0; k <= K1; ++k) {
        const long i = static_cast<long>(n) - k;
        const cplx v = i >= 0 ? u[static_cast<std::size_t>(i)] * inv_ref : cplx(0.0);
        in[2 * k] = v.real();
        in[2 * k + 1] = v.imag();
    }
}

CVec scaled(const CVec& u, double s) {
    CVec v(u);
    for (auto& x : v) x *= s;
    return v;
}

}  // namespace

CVec dpd_raw(const CVec& u, const DpdModel& m) {
    const double ref = m.amplitude_ref;
    const CVec un = scaled(u, 1.0 / ref);
    CVec y(u.size());
    if (m.kind == DpdKind::Gmp) {
        y = gmp_apply(un, m.cfg, m.gmp_coeffs());
        for (auto& v : y) v *= ref;
    } else {
        MlpTape tape;
        RVec in(2 * (m.K1 + 1));
        for (std::size_t n = 0; n < u.size(); ++n) {
            window_input(u, n, m.K1, 1.0 / ref, in.data());
            mlp_forward(m.net, m.theta.data(), in.data(), tape);
            const RVec& o = tape.act.back();
            y[n] = ref * cplx(o[0] + in[0], o[1] + in[1]);
        }
    }
    return y;
}

double normalization_scale(const CVec& u, const CVec& raw) {
    double pu = 0.0, pr = 0.0;
    for (const auto& v : u) pu += std::norm(v);
    for (const auto& v : raw) pr += std::norm(v);
    if (!(pr > 0.0) || !std::isfinite(pr)) throw NumericError("normalization_scale: degenerate DPD output power", 0);
    return std::sqrt(pu / pr);
}

ComplexSignal dpd_forward(const ComplexSignal& u, const DpdModel& m, double* scale_used) {
    ComplexSignal x{dpd_raw(u.samples, m), u.sample_rate};
    const double s = m.frozen_scale > 0.0 ? m.frozen_scale : normalization_scale(u.samples, x.samples);
    for (auto& v : x.samples) v *= s;
    require_finite(x, "dpd_forward");
    if (scale_used) *scale_used = s;
    return x;
}

Jacobian dpd_param_jacobian(const CVec& u, std::size_t n, const DpdModel& m, double scale) {
    const std::size_t P = m.theta.size();
    Jacobian J = Jacobian::Zero(2, static_cast<Eigen::Index>(P));
    const double ref = m.amplitude_ref;
    const double g = scale * ref;
    if (m.kind == DpdKind::Gmp) {
        const CVec row = gmp_basis_row(scaled(u, 1.0 / ref), n, m.cfg);
        for (std::size_t k = 0; k < row.size(); ++k) {
            const cplx b = g * row[k];
            // d/dRe c = b, d/dIm c = j b
            J(0, 2 * k) = b.real();
            J(1, 2 * k) = b.imag();
            J(0, 2 * k + 1) = -b.imag();
            J(1, 2 * k + 1) = b.real();
        }
    } else {
        MlpTape tape;
        RVec in(2 * (m.K1 + 1)), d(P);
        window_input(u, n, m.K1, 1.0 / ref, in.data());
        mlp_forward(m.net, m.theta.data(), in.data(), tape);
        for (int r = 0; r < 2; ++r) {
            std::fill(d.begin(), d.end(), 0.0);
            const double dout[2] = {r == 0 ? g : 0.0, r == 1 ? g : 0.0};
            mlp_backward(m.net, m.theta.data(), tape, dout, d.data());
            for (std::size_t k = 0; k < P; ++k) J(r, static_cast<Eigen::Index>(k)) = d[k];
        }
    }
    return J;
}

RVec dpd_raw_vjp(const CVec& u, const DpdModel& m, const CVec& w) {
    if (w.size() != u.size()) throw DomainError("dpd_raw_vjp: length mismatch");
    const std::size_t P = m.theta.size();
    const double ref = m.amplitude_ref;
    RVec grad(P, 0.0);
    if (m.kind == DpdKind::Gmp) {
        const CVec un = scaled(u, 1.0 / ref);
        const std::size_t nb = m.cfg.basis_count();
        CVec row(nb), acc(nb, 0.0);
        for (std::size_t n = 0; n < u.size(); ++n) {
            if (w[n] == cplx(0.0)) continue;
            gmp_basis_row(un, n, m.cfg, row.data());
            const cplx cw = std::conj(w[n]);
            for (std::size_t k = 0; k < nb; ++k) acc[k] += cw * row[k];
        }
        for (std::size_t k = 0; k < nb; ++k) {
            grad[2 * k] = ref * acc[k].real();
            grad[2 * k + 1] = -ref * acc[k].imag();
        }
    } else {
        MlpTape tape;
        RVec in(2 * (m.K1 + 1));
        for (std::size_t n = 0; n < u.size(); ++n) {
            if (w[n] == cplx(0.0)) continue;
            window_input(u, n, m.K1, 1.0 / ref, in.data());
            mlp_forward(m.net, m.theta.data(), in.data(), tape);
            const double dout[2] = {ref * w[n].real(), ref * w[n].imag()};
            mlp_backward(m.net, m.theta.data(), tape, dout, grad.data());
        }
    }
    return grad;
}

}  // namespace otadpd

namespace otadpd {

CVec dpd_raw(const CVec& u, const DpdModel& m, const std::vector<std::size_t>& idx) {
    const double ref = m.amplitude_ref;
    CVec y(idx.size());
    if (m.kind == DpdKind::Gmp) {
        const CVec un = scaled(u, 1.0 / ref);
        const CVec c = m.gmp_coeffs();
        CVec row(c.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            gmp_basis_row(un, idx[j], m.cfg, row.data());
            cplx acc = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) acc += row[k] * c[k];
            y[j] = ref * acc;
        }
    } else {
        MlpTape tape;
        RVec in(2 * (m.K1 + 1));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            window_input(u, idx[j], m.K1, 1.0 / ref, in.data());
            mlp_forward(m.net, m.theta.data(), in.data(), tape);
            const RVec& o = tape.act.back();
            y[j] = ref * cplx(o[0] + in[0], o[1] + in[1]);
        }
    }
    return y;
}

RVec dpd_raw_vjp(const CVec& u, const DpdModel& m, const std::vector<std::size_t>& idx, const CVec& w) {
    if (w.size() != idx.size()) throw DomainError("dpd_raw_vjp: length mismatch");
    const double ref = m.amplitude_ref;
    RVec grad(m.theta.size(), 0.0);
    if (m.kind == DpdKind::Gmp) {
        const CVec un = scaled(u, 1.0 / ref);
        const std::size_t nb = m.cfg.basis_count();
        CVec row(nb), acc(nb, 0.0);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            gmp_basis_row(un, idx[j], m.cfg, row.data());
            const cplx cw = std::conj(w[j]);
            for (std::size_t k = 0; k < nb; ++k) acc[k] += cw * row[k];
        }
        for (std::size_t k = 0; k < nb; ++k) {
            grad[2 * k] = ref * acc[k].real();
            grad[2 * k + 1] = -ref * acc[k].imag();
        }
    } else {
        MlpTape tape;
        RVec in(2 * (m.K1 + 1));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            window_input(u, idx[j], m.K1, 1.0 / ref, in.data());
            mlp_forward(m.net, m.theta.data(), in.data(), tape);
            const double dout[2] = {ref * w[j].real(), ref * w[j].imag()};
            mlp_backward(m.net, m.theta.data(), tape, dout, grad.data());
        }
    }
    return grad;
}

}  // namespace otadpd
