#include "otadpd/pa_model.hpp"

#include <algorithm>
#include <cmath>

#include "otadpd/rng.hpp"
#include "otadpd/signals.hpp"

namespace otadpd {

int PaModel::memory() const {
    if (kind == PaKind::LinearClipping) return 0;
    return std::max({cfg.La - 1, cfg.Lb - 1 + cfg.Mb, cfg.Lc - 1});
}

void PaModel::validate() const {
    if (sigma_meas < 0.0) throw DomainError("PaModel: negative measurement noise");
    if (kind == PaKind::LinearClipping) {
        if (!(x_sat > 0.0)) throw DomainError("PaModel: x_sat must be positive");
    } else {
        cfg.validate();
        if (coeffs.size() != cfg.basis_count()) throw DomainError("PaModel: coefficient count does not match config");
        if (!(input_ceiling > 0.0)) throw DomainError("PaModel: input ceiling must be positive");
    }
}

PaModel PaModel::linear_clipping(double gain, double x_sat, double sigma_meas) {
    PaModel p;
    p.kind = PaKind::LinearClipping;
    p.gain = gain;
    p.x_sat = x_sat;
    p.sigma_meas = sigma_meas;
    return p;
}

PaModel PaModel::gmp(const GmpConfig& cfg, CVec coeffs, double sigma_meas) {
    PaModel p;
    p.kind = PaKind::Gmp;
    p.cfg = cfg;
    p.coeffs = std::move(coeffs);
    p.sigma_meas = sigma_meas;
    return p;
}

ComplexSignal pa_forward_clean(const ComplexSignal& x, const PaModel& pa) {
    ComplexSignal y{CVec(x.size()), x.sample_rate};
    if (pa.kind == PaKind::LinearClipping) {
        for (std::size_t n = 0; n < x.size(); ++n) {
            const cplx v = pa.gain * x[n];
            const double r = std::abs(v);
            y[n] = r <= pa.x_sat ? v : pa.x_sat * (x[n] / std::abs(x[n]));
        }
    } else {
        if (std::isfinite(pa.input_ceiling)) {
            CVec xc = x.samples;
            for (auto& v : xc) {
                const double r = std::abs(v);
                if (r > pa.input_ceiling) v *= pa.input_ceiling / r;
            }
            y.samples = gmp_apply(xc, pa.cfg, pa.coeffs);
        } else {
            y.samples = gmp_apply(x.samples, pa.cfg, pa.coeffs);
        }
    }
    require_finite(y, "pa_forward");
    return y;
}

ComplexSignal pa_forward(const ComplexSignal& x, const PaModel& pa, Rng& rng) {
    ComplexSignal y = pa_forward_clean(x, pa);
    if (pa.sigma_meas > 0.0) {
        const double var = pa.sigma_meas * pa.sigma_meas;
        for (auto& v : y.samples) v += rng.cgauss(var);
    }
    return y;
}

CVec canonical_pa(const CVec& x, const CanonicalPa& p) {
    CVec y(x.size());
    const double q = 2.0 * p.smoothness;
    for (std::size_t n = 0; n < x.size(); ++n) {
        cplx v = 0.0;
        for (std::size_t i = 0; i < p.fir.size() && i <= n; ++i) v += p.fir[i] * x[n - i];
        const double r = std::abs(v);
        if (r == 0.0) continue;
        const double rn = r / p.x_sat;
        const double a = r / std::pow(1.0 + std::pow(rn, q), 1.0 / q);
        const double ph = std::arg(v) + p.am_pm_rad * rn * rn / (1.0 + rn * rn);
        y[n] = std::polar(a, ph);
    }
    return y;
}

PaModel make_reference_pa(std::uint64_t seed, ReferencePaInfo* info) {
    const Constellation c = make_qam(64);
    const PulseShape shape = rrc_taps(0.1, kDefaultSpan, 4);
    const GmpConfig cfg;
    Rng rng = Rng(seed).stream("pa-fit");
    const double drives[] = {6.0, 10.0, 14.0, 18.0, 22.0, 26.0, 30.0};
    const int n_sym = 4096;
    BasisMatrix B(static_cast<Eigen::Index>(std::size(drives) * n_sym * 4),
                  static_cast<Eigen::Index>(cfg.basis_count()));
    CVec yall;
    Eigen::Index row = 0;
    for (double A : drives) {
        Frame f = make_frame(n_sym, c, shape, 200e6, rng);
        for (auto& v : f.u.samples) v *= A;
        const BasisMatrix Bi = gmp_basis_matrix(f.u.samples, cfg);
        B.middleRows(row, Bi.rows()) = Bi;
        row += Bi.rows();
        const CVec y = canonical_pa(f.u.samples);
        yall.insert(yall.end(), y.begin(), y.end());
    }
    const GmpFit fit = gmp_fit(B, yall, kDefaultRidge);
    if (fit.nmse_db > -35.0)
        throw TrainingError("make_reference_pa: GMP fit NMSE " + std::to_string(fit.nmse_db) + " dB is worse than -35 dB");
    if (info) info->fit_nmse_db = fit.nmse_db;
    PaModel pa = PaModel::gmp(cfg, fit.coeffs, kReferenceMeasNoise);
    pa.input_ceiling = kReferenceCeiling;
    pa.x_sat = kReferenceSat;
    return pa;
}

}  // namespace otadpd
