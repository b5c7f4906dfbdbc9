#include "otadpd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otadpd/pa_model.hpp"
#include "otadpd/rng.hpp"

namespace otadpd {

namespace {

ComplexSignal transmit(const Frame& f, const DpdModel* dpd) { return dpd ? dpd_forward(f.u, *dpd) : f.u; }

}  // namespace

double output_power_dbm(const Chain& chain, const DpdModel* dpd, double drive, const EvalConfig& cfg,
                        std::uint64_t seed) {
    Rng rng = Rng(seed).stream("power-search");
    double p = 0.0;
    for (int i = 0; i < cfg.power_frames; ++i) {
        Frame f = chain.frame(rng, drive);
        p += mean_power(pa_forward_clean(transmit(f, dpd), chain.pa).samples);
    }
    p /= cfg.power_frames;
    return 10.0 * std::log10(p / 100.0 * 1000.0);
}

DriveSearch find_drive(const Chain& chain, const DpdModel* dpd, double target_dbm, const EvalConfig& cfg,
                       std::uint64_t seed) {
    DriveSearch r;
    auto P = [&](double a) { return output_power_dbm(chain, dpd, a, cfg, seed); };
    // start from the unity-gain guess and bracket
    double lo = std::sqrt(dbm_to_mean_square(target_dbm)) / 4.0;
    double hi = lo * 16.0;
    double plo = P(lo), phi = P(hi);
    for (int i = 0; i < 8 && plo > target_dbm; ++i) plo = P(lo /= 4.0);
    for (int i = 0; i < 3 && phi < target_dbm; ++i) phi = P(hi *= 2.0);
    if (plo > target_dbm || phi < target_dbm) {
        r.drive = phi < target_dbm ? hi : lo;
        r.achieved_dbm = phi < target_dbm ? phi : plo;
        return r;
    }
    for (r.steps = 1; r.steps <= cfg.max_bisection; ++r.steps) {
        const double mid = std::sqrt(lo * hi);
        const double pm = P(mid);
        r.drive = mid;
        r.achieved_dbm = pm;
        if (std::abs(pm - target_dbm) <= cfg.power_tol_db) {
            r.converged = true;
            return r;
        }
        (pm < target_dbm ? lo : hi) = mid;
    }
    r.steps = cfg.max_bisection;
    return r;
}

PointResult evaluate_point(const Chain& chain, const DpdModel* dpd, const Demapper& demapper, double drive,
                           const EvalConfig& cfg, std::uint64_t seed, SpectrumEstimate* err_spectrum) {
    const Rng master(seed);
    Rng data = master.stream("eval-data");
    Rng pa_noise = master.stream("eval-pa");
    Rng ch_noise = master.stream("eval-channel");

    PointResult res;
    res.drive = drive;
    GainTracker tracker;
    {
        const Frame f = chain.frame(data, drive);
        const CVec z = chain.receive(chain.channel(chain.amplify(transmit(f, dpd), pa_noise), ch_noise));
        tracker.update(f.symbols, z);
    }
    const double a2 = std::norm(tracker.gain());
    if (chain.cfg.sigma_ch > 0.0) {
        const double es_n0 = a2 / (chain.cfg.sigma_ch * chain.cfg.sigma_ch);
        res.es_n0_db = 10.0 * std::log10(es_n0);
        res.theory_ser = theoretical_ser_qam(chain.cfg.M, es_n0);
    } else {
        res.es_n0_db = std::numeric_limits<double>::infinity();
        res.theory_ser = 0.0;
    }

    const bool wide = chain.cfg.sample_rate >= 2.0 * (kAcprSpacing + kAcprBandwidth / 2.0);
    long errors = 0, count = 0;
    double pout = 0.0;
    long frames = 0;
    cplx cross = 0.0;
    double ref_e = 0.0, out_e = 0.0;
    std::vector<SpectrumEstimate> psd_out, psd_err, psd_ref;
    while (count < cfg.symbols) {
        const Frame f = chain.frame(data, drive);
        const ComplexSignal xp = chain.amplify(transmit(f, dpd), pa_noise);
        const CVec z = chain.receive(chain.channel(xp, ch_noise));
        const MessageSequence mh = demap_decide(tracker.equalize(z), demapper);
        const long take = std::min<long>(static_cast<long>(mh.size()), cfg.symbols - count);
        for (long n = 0; n < take; ++n) errors += mh[n] != f.m[n];
        count += take;
        pout += mean_power(xp.samples);
        ++frames;
        for (std::size_t n = 0; n < xp.size(); ++n) {
            cross += std::conj(f.u[n]) * xp[n];
            ref_e += std::norm(f.u[n]);
            out_e += std::norm(xp[n]);
        }
        if (wide && static_cast<int>(psd_out.size()) < cfg.spectrum_frames &&
            static_cast<int>(xp.size()) >= WelchConfig{}.nfft) {
            psd_out.push_back(welch_psd(xp));
            if (err_spectrum) {
                const cplx g = fitted_gain(xp.samples, f.u.samples);
                ComplexSignal e = xp, r = f.u;
                for (std::size_t n = 0; n < e.size(); ++n) {
                    r[n] *= g;
                    e[n] -= r[n];
                }
                psd_err.push_back(welch_psd(e));
                psd_ref.push_back(welch_psd(r));
            }
        }
    }
    res.symbols = count;
    res.ser = static_cast<double>(errors) / static_cast<double>(count);
    res.p_out_dbm = 10.0 * std::log10(pout / frames / 100.0 * 1000.0);
    // gain-fitted NMSE over all frames with one common gain
    const cplx g = cross / ref_e;
    const double sig = std::norm(g) * ref_e;
    const double err = std::max(0.0, out_e - std::norm(cross) / ref_e);
    res.nmse_db = err > 0.0 ? std::max(kNmseFloorDb, 10.0 * std::log10(err / sig)) : kNmseFloorDb;
    res.acpr_dbc = psd_out.empty() ? std::nan("") : acpr_from_psd(welch_average(psd_out));
    if (err_spectrum && !psd_err.empty()) {
        SpectrumEstimate se = welch_average(psd_err);
        const SpectrumEstimate sr = welch_average(psd_ref);
        double peak = 0.0;
        for (std::size_t i = 0; i < sr.psd.size(); ++i)
            if (std::abs(sr.freq_hz[i]) <= kAcprBandwidth / 2.0) peak = std::max(peak, sr.psd[i]);
        for (std::size_t i = 0; i < se.psd.size(); ++i) se.psd_db[i] = 10.0 * std::log10(std::max(se.psd[i] / peak, 1e-30));
        *err_spectrum = se;
    }
    return res;
}

}  // namespace otadpd
