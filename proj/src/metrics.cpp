#include "otadpd/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>

namespace otadpd {

double ser(const MessageSequence& m, const MessageSequence& m_hat) {
    if (m.size() != m_hat.size()) throw DomainError("ser: length mismatch");
    if (m.empty()) throw DomainError("ser: empty sequences");
    std::size_t e = 0;
    for (std::size_t n = 0; n < m.size(); ++n) e += m[n] != m_hat[n];
    return static_cast<double>(e) / static_cast<double>(m.size());
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double theoretical_ser_qam(int M, double es_n0) {
    const int k = static_cast<int>(std::lround(std::sqrt(M)));
    if (M < 4 || k * k != M) throw DomainError("theoretical_ser_qam: M must be square");
    if (!(es_n0 > 0.0)) throw DomainError("theoretical_ser_qam: EsN0 must be positive");
    const double pa = 2.0 * (1.0 - 1.0 / k) * q_function(std::sqrt(3.0 * es_n0 / (M - 1)));
    return pa * (2.0 - pa);  // 1 - (1 - pa)^2 without cancellation
}

cplx fitted_gain(const CVec& y, const CVec& y_ref) {
    if (y.size() != y_ref.size()) throw DomainError("fitted_gain: length mismatch");
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        num += std::conj(y_ref[n]) * y[n];
        den += std::norm(y_ref[n]);
    }
    if (!(den > 0.0)) throw DomainError("nmse: all-zero reference");
    return num / den;
}

double nmse_db(const CVec& y, const CVec& y_ref) {
    const cplx a = fitted_gain(y, y_ref);
    double e = 0.0, r = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        e += std::norm(y[n] - a * y_ref[n]);
        r += std::norm(a * y_ref[n]);
    }
    if (!(r > 0.0)) return e > 0.0 ? 0.0 : kNmseFloorDb;
    if (e <= 0.0) return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(e / r));
}

double SpectrumEstimate::integrate(double f_lo, double f_hi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < freq_hz.size(); ++i)
        if (freq_hz[i] >= f_lo && freq_hz[i] <= f_hi) s += psd[i];
    return s * bin_width();
}

double SpectrumEstimate::total_power() const {
    double s = 0.0;
    for (double v : psd) s += v;
    return s * bin_width();
}

void SpectrumEstimate::write_csv(std::ostream& os) const {
    os << "freq_hz,psd_db\n";
    os.precision(10);
    for (std::size_t i = 0; i < freq_hz.size(); ++i) os << freq_hz[i] << ',' << psd_db[i] << '\n';
}

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void fill_db(SpectrumEstimate& s, double ref) {
    s.psd_db.resize(s.psd.size());
    for (std::size_t i = 0; i < s.psd.size(); ++i)
        s.psd_db[i] = 10.0 * std::log10(std::max(s.psd[i] / ref, 1e-30));
}
}  // namespace

SpectrumEstimate welch_psd(const ComplexSignal& x, const WelchConfig& cfg) {
    const int nfft = cfg.nfft;
    if (nfft < 2) throw DomainError("welch_psd: nfft too small");
    if (static_cast<int>(x.size()) < nfft) throw DomainError("welch_psd: signal shorter than one segment");
    if (!(x.sample_rate > 0.0)) throw DomainError("welch_psd: sample rate must be positive");
    const int step = std::max(1, static_cast<int>(std::lround(nfft * (1.0 - cfg.overlap))));

    RVec w(nfft);
    double wss = 0.0;
    for (int i = 0; i < nfft; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / nfft);
        wss += w[i] * w[i];
    }

    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(nfft));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        plan = fftw_plan_dft_1d(nfft, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    RVec acc(nfft, 0.0);
    int segs = 0;
    for (std::size_t start = 0; start + nfft <= x.size(); start += step) {
        for (int i = 0; i < nfft; ++i) {
            const cplx v = x[start + i] * w[i];
            buf[i][0] = v.real();
            buf[i][1] = v.imag();
        }
        fftw_execute(plan);
        for (int i = 0; i < nfft; ++i) acc[i] += buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
        ++segs;
    }
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);

    SpectrumEstimate s;
    s.sample_rate = x.sample_rate;
    s.nfft = nfft;
    s.segments = segs;
    s.freq_hz.resize(nfft);
    s.psd.resize(nfft);
    const double norm = 1.0 / (segs * x.sample_rate * wss);
    const int half = nfft / 2;
    // fftshift
    for (int i = 0; i < nfft; ++i) {
        const int k = (i + half) % nfft;
        s.freq_hz[i] = (i - half) * x.sample_rate / nfft;
        s.psd[i] = acc[k] * norm;
    }
    fill_db(s, 1.0);
    return s;
}

SpectrumEstimate welch_average(const std::vector<SpectrumEstimate>& parts) {
    if (parts.empty()) throw DomainError("welch_average: nothing to average");
    SpectrumEstimate s = parts.front();
    int segs = parts.front().segments;
    for (std::size_t p = 1; p < parts.size(); ++p) {
        if (parts[p].nfft != s.nfft || parts[p].sample_rate != s.sample_rate)
            throw DomainError("welch_average: mismatched estimates");
        for (std::size_t i = 0; i < s.psd.size(); ++i) s.psd[i] += parts[p].psd[i];
        segs += parts[p].segments;
    }
    for (double& v : s.psd) v /= static_cast<double>(parts.size());
    s.segments = segs;
    fill_db(s, 1.0);
    return s;
}

double acpr_from_psd(const SpectrumEstimate& s, double bw, double spacing) {
    if (s.sample_rate < 2.0 * (spacing + bw / 2.0)) throw DomainError("acpr: sample rate too low for the adjacent bands");
    const double in = s.integrate(-bw / 2.0, bw / 2.0);
    const double up = s.integrate(spacing - bw / 2.0, spacing + bw / 2.0);
    const double lo = s.integrate(-spacing - bw / 2.0, -spacing + bw / 2.0);
    if (!(in > 0.0)) throw DomainError("acpr: no in-band power");
    return 10.0 * std::log10(std::max(up, lo) / in);
}

double acpr(const ComplexSignal& x, double bw, double spacing) {
    if (x.sample_rate < 2.0 * (spacing + bw / 2.0)) throw DomainError("acpr: sample rate too low for the adjacent bands");
    return acpr_from_psd(welch_psd(x), bw, spacing);
}

SpectrumEstimate error_spectrum(const ComplexSignal& x_actual, const ComplexSignal& x_ideal, double bw,
                                const WelchConfig& cfg) {
    if (x_actual.size() != x_ideal.size()) throw DomainError("error_spectrum: length mismatch");
    if (static_cast<int>(x_actual.size()) < cfg.nfft) throw DomainError("error_spectrum: shorter than one segment");
    const cplx a = fitted_gain(x_actual.samples, x_ideal.samples);
    ComplexSignal e{CVec(x_actual.size()), x_actual.sample_rate}, r{CVec(x_actual.size()), x_actual.sample_rate};
    for (std::size_t n = 0; n < e.size(); ++n) {
        r[n] = a * x_ideal[n];
        e[n] = x_actual[n] - r[n];
    }
    SpectrumEstimate se = welch_psd(e, cfg);
    const SpectrumEstimate sr = welch_psd(r, cfg);
    double peak = 0.0;
    for (std::size_t i = 0; i < sr.psd.size(); ++i)
        if (std::abs(sr.freq_hz[i]) <= bw / 2.0) peak = std::max(peak, sr.psd[i]);
    if (!(peak > 0.0)) throw DomainError("error_spectrum: reference has no in-band power");
    fill_db(se, peak);
    return se;
}

}  // namespace otadpd
