#pragma once

// Independent long double forward pass of the residual time-delay net, used as
// the finite-difference oracle for the analytic Jacobian.

#include <algorithm>
#include <complex>
#include <vector>

#include "otadpd/dpd_model.hpp"

namespace oracle {

using ld = long double;

struct Out {
    ld re = 0, im = 0;
    ld min_abs_preact = 1e300L;  // distance to the nearest rectifier kink
};

// Raw output at sample n (no normalization) for parameters th.
inline Out r2tdnn_raw(const otadpd::CVec& u, std::size_t n, const otadpd::DpdModel& m, const std::vector<ld>& th) {
    const ld ref = m.amplitude_ref;
    std::vector<ld> a;
    for (int k = 0; k <= m.K1; ++k) {
        const long i = static_cast<long>(n) - k;
        const otadpd::cplx v = i >= 0 ? u[static_cast<std::size_t>(i)] : otadpd::cplx(0.0, 0.0);
        a.push_back(static_cast<ld>(v.real()) / ref);
        a.push_back(static_cast<ld>(v.imag()) / ref);
    }
    Out o;
    std::size_t off = 0;
    const auto& w = m.net.widths;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const int in = w[l], out = w[l + 1];
        std::vector<ld> z(static_cast<std::size_t>(out));
        for (int r = 0; r < out; ++r) {
            ld s = th[off + static_cast<std::size_t>(out * in) + static_cast<std::size_t>(r)];
            for (int c = 0; c < in; ++c) s += th[off + static_cast<std::size_t>(r * in + c)] * a[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = s;
        }
        off += static_cast<std::size_t>(out * in + out);
        if (l + 2 < w.size()) {
            for (auto& v : z) {
                o.min_abs_preact = std::min(o.min_abs_preact, v < 0 ? -v : v);
                v = v > 0 ? v : 0;
            }
        }
        a = z;
    }
    const otadpd::cplx un = u[n];
    o.re = (a[0] + static_cast<ld>(un.real()) / ref) * ref;
    o.im = (a[1] + static_cast<ld>(un.imag()) / ref) * ref;
    return o;
}

}  // namespace oracle
