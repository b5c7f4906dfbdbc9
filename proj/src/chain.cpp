#include "otadpd/chain.hpp"

#include <cmath>

#include "otadpd/rng.hpp"

namespace otadpd {

Chain::Chain(const ChainConfig& c, PaModel pa_model)
    : cfg(c), constellation(make_qam(c.M)), shape(rrc_taps(c.roll_off, c.span, c.R)), pa(std::move(pa_model)) {
    if (c.N < 1) throw DomainError("Chain: N must be positive");
    if (c.sigma_ch < 0.0) throw DomainError("Chain: negative channel noise");
    pa.validate();
}

Frame Chain::frame(Rng& rng, double drive) const {
    Frame f = make_frame(cfg.N, constellation, shape, cfg.sample_rate, rng);
    for (auto& v : f.u.samples) v *= drive;
    return f;
}

ComplexSignal Chain::amplify(const ComplexSignal& x, Rng& rng) const {
    return cfg.meas_noise ? pa_forward(x, pa, rng) : pa_forward_clean(x, pa);
}

ComplexSignal Chain::channel(const ComplexSignal& x_pa, Rng& rng) const {
    ComplexSignal y = x_pa;
    const double var = cfg.sigma_ch * cfg.sigma_ch;
    if (var > 0.0)
        for (auto& v : y.samples) v += rng.cgauss(var);
    return y;
}

CVec Chain::receive(const ComplexSignal& y) const { return matched_filter_downsample(y, shape); }

cplx ls_gain(const CVec& s, const CVec& z) {
    if (s.size() != z.size()) throw DomainError("ls_gain: length mismatch");
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        num += std::conj(s[n]) * z[n];
        den += std::norm(s[n]);
    }
    if (!(den > 0.0)) throw DomainError("ls_gain: zero reference");
    return num / den;
}

CVec GainTracker::equalize(const CVec& z) const {
    CVec out(z);
    const cplx inv = 1.0 / alpha_;
    for (auto& v : out) v *= inv;
    return out;
}

}  // namespace otadpd
