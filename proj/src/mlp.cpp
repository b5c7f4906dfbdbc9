#include "otadpd/mlp.hpp"

#include <cmath>

#include "otadpd/rng.hpp"

namespace otadpd {

std::size_t MlpShape::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        n += static_cast<std::size_t>(widths[l + 1]) * (widths[l] + 1);
    return n;
}

RVec mlp_init(const MlpShape& s, Rng& rng, bool zero_output) {
    RVec p(s.param_count(), 0.0);
    std::size_t off = 0;
    const std::size_t layers = s.widths.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = s.widths[l], out = s.widths[l + 1];
        const double lim = std::sqrt(6.0 / in);
        const bool zero = zero_output && l + 1 == layers;
        for (int i = 0; i < out * in; ++i) p[off + i] = zero ? 0.0 : rng.uniform(-lim, lim);
        off += static_cast<std::size_t>(out) * in + out;
    }
    return p;
}

void mlp_forward(const MlpShape& s, const double* params, const double* in, MlpTape& tape) {
    const std::size_t layers = s.widths.size() - 1;
    tape.act.resize(layers + 1);
    tape.act[0].assign(in, in + s.widths[0]);
    const double* p = params;
    for (std::size_t l = 0; l < layers; ++l) {
        const int ni = s.widths[l], no = s.widths[l + 1];
        const double* W = p;
        const double* b = p + static_cast<std::size_t>(no) * ni;
        const RVec& a = tape.act[l];
        RVec& z = tape.act[l + 1];
        z.resize(no);
        for (int o = 0; o < no; ++o) {
            double acc = b[o];
            const double* w = W + static_cast<std::size_t>(o) * ni;
            for (int i = 0; i < ni; ++i) acc += w[i] * a[i];
            z[o] = (l + 1 < layers && acc < 0.0) ? 0.0 : acc;
        }
        p += static_cast<std::size_t>(no) * ni + no;
    }
}

void mlp_backward(const MlpShape& s, const double* params, const MlpTape& tape, const double* dout, double* dparams,
                  double* din) {
    const std::size_t layers = s.widths.size() - 1;
    std::vector<std::size_t> off(layers);
    std::size_t o = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        off[l] = o;
        o += static_cast<std::size_t>(s.widths[l + 1]) * s.widths[l] + s.widths[l + 1];
    }
    RVec delta(dout, dout + s.widths.back());
    RVec prev;
    for (std::size_t l = layers; l-- > 0;) {
        const int ni = s.widths[l], no = s.widths[l + 1];
        // rectifier mask: a hidden unit with zero output passes no gradient
        if (l + 1 < layers)
            for (int k = 0; k < no; ++k)
                if (tape.act[l + 1][k] <= 0.0) delta[k] = 0.0;
        const double* W = params + off[l];
        double* dW = dparams + off[l];
        double* db = dW + static_cast<std::size_t>(no) * ni;
        const RVec& a = tape.act[l];
        for (int k = 0; k < no; ++k) {
            if (delta[k] == 0.0) continue;
            double* row = dW + static_cast<std::size_t>(k) * ni;
            for (int i = 0; i < ni; ++i) row[i] += delta[k] * a[i];
            db[k] += delta[k];
        }
        if (l == 0 && !din) break;
        prev.assign(ni, 0.0);
        for (int k = 0; k < no; ++k) {
            if (delta[k] == 0.0) continue;
            const double* w = W + static_cast<std::size_t>(k) * ni;
            for (int i = 0; i < ni; ++i) prev[i] += w[i] * delta[k];
        }
        delta.swap(prev);
    }
    if (din)
        for (int i = 0; i < s.widths[0]; ++i) din[i] = delta[i];
}

}  // namespace otadpd
