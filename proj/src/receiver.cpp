#include "otadpd/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "otadpd/rng.hpp"

namespace otadpd {

Demapper make_ml_demapper(const Constellation& c, double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("make_ml_demapper: noise variance must be positive");
    Demapper d;
    d.kind = DemapperKind::Ml;
    d.constellation = c;
    d.noise_var = noise_var;
    return d;
}

Demapper make_nn_demapper(const Constellation& c, Rng& rng) {
    Demapper d;
    d.kind = DemapperKind::Nn;
    d.constellation = c;
    d.net.widths = {2, 32, 32, c.order};
    d.params = mlp_init(d.net, rng, false);
    return d;
}

namespace {

// Fills logits for one symbol; returns nothing, caller applies softmax.
void logits(cplx z, const Demapper& d, MlpTape& tape, RVec& out) {
    const int M = d.constellation.order;
    out.resize(M);
    if (d.kind == DemapperKind::Ml) {
        for (int i = 0; i < M; ++i) out[i] = -std::norm(z - d.constellation.points[i]) / d.noise_var;
    } else {
        const double in[2] = {z.real(), z.imag()};
        mlp_forward(d.net, d.params.data(), in, tape);
        out = tape.act.back();
    }
}

void softmax(RVec& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        s += x;
    }
    for (double& x : v) x /= s;
}

void check_demapper(const Demapper& d) {
    if (d.kind == DemapperKind::Ml && !(d.noise_var > 0.0))
        throw DomainError("demap: ML noise variance must be positive");
    if (d.kind == DemapperKind::Nn && d.params.size() != d.net.param_count())
        throw DomainError("demap: NN parameter count mismatch");
}

}  // namespace

ProbabilityMatrix demap(const CVec& z, const Demapper& d) {
    check_demapper(d);
    const int M = d.constellation.order;
    ProbabilityMatrix P{z.size(), static_cast<std::size_t>(M), RVec(z.size() * M)};
    MlpTape tape;
    RVec row;
    for (std::size_t n = 0; n < z.size(); ++n) {
        if (!std::isfinite(z[n].real()) || !std::isfinite(z[n].imag()))
            throw NumericError("demap: non-finite symbol", n);
        logits(z[n], d, tape, row);
        softmax(row);
        std::copy(row.begin(), row.end(), P.p.begin() + static_cast<long>(n * M));
    }
    return P;
}

MessageSequence decide(const ProbabilityMatrix& P) {
    MessageSequence m(P.rows);
    for (std::size_t n = 0; n < P.rows; ++n) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < P.cols; ++i)
            if (P.at(n, i) > P.at(n, best)) best = i;
        m[n] = static_cast<int>(best);
    }
    return m;
}

MessageSequence demap_decide(const CVec& z, const Demapper& d) {
    check_demapper(d);
    MessageSequence m(z.size());
    if (d.kind == DemapperKind::Ml) {
        for (std::size_t n = 0; n < z.size(); ++n) m[n] = nearest_point(z[n], d.constellation);
        return m;
    }
    MlpTape tape;
    RVec row;
    for (std::size_t n = 0; n < z.size(); ++n) {
        logits(z[n], d, tape, row);
        m[n] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return m;
}

CeLoss ce_loss(const MessageSequence& m, const ProbabilityMatrix& P) {
    if (m.size() != P.rows) throw DomainError("ce_loss: length mismatch");
    CeLoss out;
    out.per_example.resize(m.size());
    double s = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) {
        out.per_example[n] = -std::log(P.at(n, static_cast<std::size_t>(m[n])) + kCeFloor);
        s += out.per_example[n];
    }
    out.mean = m.empty() ? 0.0 : s / static_cast<double>(m.size());
    return out;
}

double demapper_ce(const Demapper& d, const MessageSequence& m, const CVec& z) {
    return ce_loss(m, demap(z, d)).mean;
}

namespace {

double draw_noise_var(const PretrainConfig& cfg, Rng& rng) {
    if (cfg.noise_var_hi <= cfg.noise_var_lo) return cfg.noise_var_lo;
    return std::exp(rng.uniform(std::log(cfg.noise_var_lo), std::log(cfg.noise_var_hi)));
}

void train_round(Demapper& d, const PretrainConfig& cfg, int steps, double lr0, double lr1, Rng& rng) {
    const int M = d.constellation.order;
    AdamState st;
    AdamConfig ac;
    RVec grad(d.params.size());
    MlpTape tape;
    RVec dlog(M);
    for (int s = 0; s < steps; ++s) {
        // cosine decay from lr0 to lr1
        const double frac = steps > 1 ? static_cast<double>(s) / (steps - 1) : 1.0;
        ac.lr = lr1 + 0.5 * (lr0 - lr1) * (1.0 + std::cos(frac * 3.141592653589793));
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int b = 0; b < cfg.batch; ++b) {
            const int m = rng.integer(0, M - 1);
            const double nv = draw_noise_var(cfg, rng);
            const cplx z = d.constellation.points[m] + rng.cgauss(nv);
            const double in[2] = {z.real(), z.imag()};
            mlp_forward(d.net, d.params.data(), in, tape);
            dlog = tape.act.back();
            softmax(dlog);
            dlog[m] -= 1.0;
            for (double& v : dlog) v /= cfg.batch;
            mlp_backward(d.net, d.params.data(), tape, dlog.data(), grad.data());
        }
        adam_step(d.params, grad, st, ac);
    }
}

}  // namespace

Demapper pretrain_demapper(const Constellation& c, const PretrainConfig& cfg, Rng& rng, PretrainReport* report) {
    Rng init = rng.stream("demapper-init");
    Rng train = rng.stream("demapper-train");
    Rng hold = rng.stream("demapper-holdout");
    Demapper d = make_nn_demapper(c, init);

    // held-out set at the operating (geometric mid) noise variance
    const double nv = std::sqrt(cfg.noise_var_lo * cfg.noise_var_hi);
    MessageSequence m(cfg.holdout);
    CVec z(cfg.holdout);
    for (int n = 0; n < cfg.holdout; ++n) {
        m[n] = hold.integer(0, c.order - 1);
        z[n] = c.points[m[n]] + hold.cgauss(nv);
    }
    const double ce_ml = demapper_ce(make_ml_demapper(c, nv), m, z);

    train_round(d, cfg, cfg.steps, cfg.lr, cfg.lr_final, train);
    double ce_nn = demapper_ce(d, m, z);
    int rounds = 1;
    while (ce_nn > (1.0 + cfg.tolerance) * ce_ml && rounds < cfg.max_rounds) {
        train_round(d, cfg, cfg.steps / 2, cfg.lr * 0.1, cfg.lr_final, train);
        ce_nn = demapper_ce(d, m, z);
        ++rounds;
    }
    if (report) *report = {ce_nn, ce_ml, rounds};
    if (ce_nn > (1.0 + cfg.tolerance) * ce_ml) {
        std::ostringstream os;
        os << "pretrain_demapper: CE " << ce_nn << " exceeds " << (1.0 + cfg.tolerance) << " x ML CE " << ce_ml
           << " after " << rounds << " rounds";
        throw TrainingError(os.str());
    }
    return d;
}

}  // namespace otadpd
