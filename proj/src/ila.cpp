#include "otadpd/ila.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "otadpd/adam.hpp"
#include "otadpd/metrics.hpp"
#include "otadpd/rng.hpp"
#include "otadpd/signals.hpp"

namespace otadpd {

namespace {

constexpr int kHalfTaps = 32;
constexpr double kKaiserBeta = 8.0;

double kernel(double t) {
    const double a = std::abs(t);
    if (a >= kHalfTaps) return 0.0;
    const double s = a < 1e-12 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
    const double r = t / kHalfTaps;
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, kKaiserBeta);
    return s * w;
}

void check_rate(const ComplexSignal& x, const FeedbackAdc& adc) {
    if (!(adc.rate > 0.0)) throw DomainError("feedback_capture: ADC rate must be positive");
    if (!(x.sample_rate > 0.0)) throw DomainError("feedback_capture: signal has no sample rate");
    if (adc.rate > x.sample_rate * (1.0 + 1e-12))
        throw DomainError("feedback_capture: ADC rate exceeds the full sample rate");
    if (x.size() == 0) throw DomainError("feedback_capture: empty signal");
}

// Value of the cyclic band-limited reconstruction at fractional sample position tau.
cplx interp_cyclic(const CVec& x, double tau) {
    const long L = static_cast<long>(x.size());
    const long base = static_cast<long>(std::floor(tau));
    cplx acc = 0.0;
    for (long n = base - kHalfTaps + 1; n <= base + kHalfTaps; ++n) {
        long k = n % L;
        if (k < 0) k += L;
        acc += x[static_cast<std::size_t>(k)] * kernel(tau - n);
    }
    return acc;
}

bool same_rate(const ComplexSignal& x, const FeedbackAdc& adc) {
    return std::abs(adc.rate - x.sample_rate) <= 1e-12 * x.sample_rate;
}

}  // namespace

ComplexSignal adc_sample(const ComplexSignal& x_pa, const FeedbackAdc& adc) {
    check_rate(x_pa, adc);
    if (same_rate(x_pa, adc)) return x_pa;
    const double ratio = x_pa.sample_rate / adc.rate;
    const long K = static_cast<long>(std::ceil(static_cast<double>(x_pa.size()) / ratio));
    ComplexSignal c{CVec(static_cast<std::size_t>(K)), adc.rate};
    for (long k = 0; k < K; ++k) c[static_cast<std::size_t>(k)] = interp_cyclic(x_pa.samples, k * ratio);
    return c;
}

ComplexSignal feedback_capture(const ComplexSignal& x_pa, const FeedbackAdc& adc) {
    check_rate(x_pa, adc);
    if (same_rate(x_pa, adc)) return x_pa;
    const double ratio = x_pa.sample_rate / adc.rate;  // source samples per ADC sample
    const long L = static_cast<long>(x_pa.size());
    const long K = static_cast<long>(std::ceil(static_cast<double>(L) / ratio));
    // ADC samples k in [-H, K + H); the underlying waveform is cyclic in L
    const long k0 = -kHalfTaps;
    const long k1 = K + kHalfTaps;
    CVec c(static_cast<std::size_t>(k1 - k0));
    for (long k = k0; k < k1; ++k) c[static_cast<std::size_t>(k - k0)] = interp_cyclic(x_pa.samples, k * ratio);

    ComplexSignal out{CVec(x_pa.size()), x_pa.sample_rate};
    for (long n = 0; n < L; ++n) {
        const double sigma = n / ratio;
        const long base = static_cast<long>(std::floor(sigma));
        cplx acc = 0.0;
        for (long k = base - kHalfTaps + 1; k <= base + kHalfTaps; ++k) acc += c[static_cast<std::size_t>(k - k0)] * kernel(sigma - k);
        out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

namespace {

double mse(const CVec& a, const CVec& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += std::norm(a[n] - b[n]);
    return s / static_cast<double>(a.size());
}

void fit_gmp_post(DpdModel& post, const CVec& in, const CVec& target, double ridge) {
    const double inv = 1.0 / post.amplitude_ref;
    CVec xin(in), y(target);
    for (auto& v : xin) v *= inv;
    for (auto& v : y) v *= inv;
    post.set_gmp_coeffs(gmp_fit(xin, y, post.cfg, ridge).coeffs);
}

void fit_nn_post(DpdModel& post, const CVec& in, const CVec& target, const IlaConfig& cfg, Rng& rng) {
    AdamState st;
    AdamConfig ac;
    ac.lr = cfg.nn_lr;
    const double inv2 = 1.0 / (post.amplitude_ref * post.amplitude_ref);
    std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.nn_batch));
    for (int s = 0; s < cfg.nn_steps; ++s) {
        for (auto& i : idx) i = static_cast<std::size_t>(rng.integer(0, static_cast<int>(in.size()) - 1));
        const CVec raw = dpd_raw(in, post, idx);
        CVec w(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) w[j] = 2.0 * (raw[j] - target[idx[j]]) * inv2 / static_cast<double>(idx.size());
        adam_step(post.theta, dpd_raw_vjp(in, post, idx, w), st, ac);
    }
}

}  // namespace

IlaResult ila_train(const ComplexSignal& u, const PaModel& pa, const FeedbackAdc& adc, DpdModel model,
                    const IlaConfig& cfg, Rng& rng) {
    model.validate();
    if (cfg.iters < 1) throw DomainError("ila_train: iters must be positive");
    model.frozen_scale = 0.0;
    IlaResult res;
    int rising = 0;
    for (int it = 0; it < cfg.iters; ++it) {
        const ComplexSignal x = dpd_forward(u, model);
        const ComplexSignal xp = pa_forward(x, pa, rng);
        const ComplexSignal cap = feedback_capture(xp, adc);
        CVec post_in = cap.samples;
        if (cfg.gain_normalize) {
            const cplx g = fitted_gain(cap.samples, x.samples);
            for (auto& v : post_in) v /= g;
        }
        DpdModel post = model;
        if (post.kind == DpdKind::Gmp)
            fit_gmp_post(post, post_in, x.samples, cfg.ridge);
        else
            fit_nn_post(post, post_in, x.samples, cfg, rng);
        const double e = mse(dpd_raw(post_in, post), x.samples);
        if (!std::isfinite(e)) throw TrainingError("ila_train: non-finite postdistorter residual");

        TrainRecord r;
        r.iteration = it;
        r.loss = e;
        r.grad_norm = std::nan("");
        r.power_dbm = measure_power_dbm(xp);
        r.ser = std::nan("");
        r.nmse_db = nmse_db(xp.samples, u.samples);
        const bool wide = xp.sample_rate >= 2.0 * (kAcprSpacing + kAcprBandwidth / 2.0);
        r.acpr_dbc = (wide && static_cast<int>(xp.size()) >= WelchConfig{}.nfft) ? acpr(xp) : std::nan("");
        res.records.push_back(r);

        if (!res.post_mse.empty() && e > res.post_mse.back())
            ++rising;
        else
            rising = 0;
        res.post_mse.push_back(e);
        if (rising >= 3) {
            std::ostringstream os;
            os << "ila_train: postdistorter MSE rose for 3 consecutive iterations:";
            for (double v : res.post_mse) os << ' ' << v;
            throw TrainingError(os.str());
        }
        model.theta = post.theta;
    }
    double s = 0.0;
    dpd_forward(u, model, &s);
    model.frozen_scale = s;
    res.model = model;
    return res;
}

}  // namespace otadpd
