#include "otadpd/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otadpd {

void require_finite(const ComplexSignal& x, const char* what) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag()))
            throw NumericError(std::string(what) + ": non-finite sample", i);
}

int Constellation::side() const { return static_cast<int>(std::lround(std::sqrt(order))); }

namespace {
int gray(int v) { return v ^ (v >> 1); }

bool is_square_pow2(int M, int& side) {
    if (M < 4) return false;
    side = static_cast<int>(std::lround(std::sqrt(M)));
    return side * side == M && (side & (side - 1)) == 0;
}
}  // namespace

Constellation make_qam(int M) {
    int k = 0;
    if (!is_square_pow2(M, k)) throw DomainError("make_qam: M must be a square power of two >= 4");
    const int bits = static_cast<int>(std::lround(std::log2(k)));
    // level index q in 0..k-1 has amplitude 2q-k+1; Gray code g(q) is the label per axis
    std::vector<int> inv(k);
    for (int q = 0; q < k; ++q) inv[gray(q)] = q;
    double e = 0.0;
    Constellation c;
    c.order = M;
    c.points.resize(M);
    c.labeling.resize(M);
    for (int m = 0; m < M; ++m) {
        const int qi = inv[m >> bits];
        const int qq = inv[m & (k - 1)];
        c.points[m] = cplx(2 * qi - k + 1, 2 * qq - k + 1);
        c.labeling[m] = m;
        e += std::norm(c.points[m]);
    }
    const double s = 1.0 / std::sqrt(e / M);
    for (auto& p : c.points) p *= s;
    return c;
}

CVec map_messages(const MessageSequence& m, const Constellation& c) {
    CVec out(m.size());
    for (std::size_t n = 0; n < m.size(); ++n) {
        if (m[n] < 0 || m[n] >= c.order)
            throw DomainError("map_messages: message " + std::to_string(m[n]) + " out of range at " +
                              std::to_string(n));
        out[n] = c.points[c.labeling[m[n]]];
    }
    return out;
}

int nearest_point(cplx z, const Constellation& c) {
    int best = 0;
    double bd = std::norm(z - c.points[0]);
    for (int i = 1; i < c.order; ++i) {
        const double d = std::norm(z - c.points[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

PulseShape rrc_taps(double beta, int span_symbols, int R) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("rrc_taps: roll-off outside [0,1]");
    if (span_symbols < 8) throw DomainError("rrc_taps: span below 8 symbols");
    if (R < 2) throw DomainError("rrc_taps: oversampling below 2");
    using std::numbers::pi;
    const int half = span_symbols * R / 2;
    PulseShape p{RVec(2 * half + 1), span_symbols, R, beta};
    for (int i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i) / R;
        double h;
        if (i == 0) {
            h = 1.0 - beta + 4.0 * beta / pi;
        } else if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-12) {
            h = beta / std::sqrt(2.0) *
                ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
        } else {
            h = (std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta))) /
                (pi * t * (1.0 - 16.0 * beta * beta * t * t));
        }
        p.taps[i + half] = h;
    }
    double e = 0.0;
    for (double h : p.taps) e += h * h;
    const double s = 1.0 / std::sqrt(e);
    for (double& h : p.taps) h *= s;
    return p;
}

ComplexSignal modulate(const CVec& symbols, const PulseShape& shape, double sample_rate) {
    if (symbols.empty()) throw DomainError("modulate: empty symbol sequence");
    const int R = shape.oversampling;
    const long N = static_cast<long>(symbols.size());
    const long L = N * R;
    const int D = shape.delay();
    ComplexSignal u{CVec(L), sample_rate};
    // polyphase: sample k = nR + r receives symbol j with tap index D + k - jR
    for (long k = 0; k < L; ++k) {
        const long r = k % R;
        const long n = k / R;
        cplx acc = 0.0;
        for (long d = -((D - r) / R); d <= (D + r) / R; ++d) {
            const long t = D + r - d * R;
            if (t < 0 || t >= static_cast<long>(shape.taps.size())) continue;
            long j = (n + d) % N;
            if (j < 0) j += N;
            acc += shape.taps[t] * symbols[j];
        }
        u.samples[k] = acc;
    }
    return u;
}

CVec matched_filter_downsample(const ComplexSignal& y, const PulseShape& shape) {
    const int R = shape.oversampling;
    const long L = static_cast<long>(y.size());
    if (L == 0 || L % R != 0) throw DomainError("matched_filter_downsample: length not divisible by R");
    const long N = L / R;
    const int D = shape.delay();
    const long T = static_cast<long>(shape.taps.size());
    CVec out(N);
    for (long n = 0; n < N; ++n) {
        cplx acc = 0.0;
        const long c = n * R;
        for (long t = 0; t < T; ++t) {
            long k = (c + t - D) % L;
            if (k < 0) k += L;
            acc += shape.taps[t] * y.samples[k];
        }
        out[n] = acc;
    }
    return out;
}

double mean_power(const CVec& x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double measure_power_dbm(const ComplexSignal& x) {
    if (x.size() == 0) throw DomainError("measure_power_dbm: empty signal");
    const double p = mean_power(x.samples);
    if (p <= 0.0) throw DomainError("measure_power_dbm: all-zero signal");
    return 10.0 * std::log10(p / 100.0 * 1000.0);
}

double dbm_to_mean_square(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0 * 100.0; }

double measure_papr(const ComplexSignal& x) {
    if (x.size() == 0) throw DomainError("measure_papr: empty signal");
    const double p = mean_power(x.samples);
    if (p <= 0.0) throw DomainError("measure_papr: all-zero signal");
    double mx = 0.0;
    for (const auto& v : x.samples) mx = std::max(mx, std::norm(v));
    return 10.0 * std::log10(mx / p);
}

}  // namespace otadpd

#include "otadpd/rng.hpp"

namespace otadpd {

Frame make_frame(int N, const Constellation& c, const PulseShape& shape, double sample_rate, Rng& rng) {
    Frame f;
    f.m.resize(N);
    for (auto& v : f.m) v = rng.integer(0, c.order - 1);
    f.symbols = map_messages(f.m, c);
    f.u = modulate(f.symbols, shape, sample_rate);
    const double g = std::sqrt(static_cast<double>(shape.oversampling));
    for (auto& v : f.u.samples) v *= g;
    return f;
}

}  // namespace otadpd
