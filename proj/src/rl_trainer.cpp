#include "otadpd/rl_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otadpd/metrics.hpp"
#include "otadpd/rng.hpp"

namespace otadpd {

void PolicyConfig::validate() const {
    if (!(sigma2 >= 0.0 && sigma2 < 1.0)) throw DomainError("PolicyConfig: sigma_pi^2 must lie in [0, 1)");
    if (G < 0) throw DomainError("PolicyConfig: G must be non-negative");
}

ComplexSignal policy_sample(const ComplexSignal& x, double sigma2, Rng& rng) {
    if (!(sigma2 >= 0.0 && sigma2 < 1.0)) throw DomainError("policy_sample: sigma_pi^2 must lie in [0, 1)");
    ComplexSignal out = x;
    if (sigma2 == 0.0) return out;
    const double a = std::sqrt(1.0 - sigma2);
    for (auto& v : out.samples) v = a * v + rng.cgauss(sigma2);
    return out;
}

RVec log_policy_grad(cplx x_tilde, cplx x, const Jacobian& jac, double sigma2) {
    if (!(sigma2 > 0.0 && sigma2 < 1.0)) throw DomainError("log_policy_grad: sigma_pi^2 must lie in (0, 1)");
    const double a = std::sqrt(1.0 - sigma2);
    const cplx e = x_tilde - a * x;
    const double k = 2.0 * a / sigma2;
    RVec g(static_cast<std::size_t>(jac.cols()));
    for (Eigen::Index j = 0; j < jac.cols(); ++j) g[j] = k * (e.real() * jac(0, j) + e.imag() * jac(1, j));
    return g;
}

namespace {

struct Prepared {
    std::size_t L = 0, N = 0;
    int R = 0;
    double ref = 0.0;
    RVec l;
};

Prepared prepare(const RVec& losses, const ComplexSignal& x_tilde, const ComplexSignal& x, const ComplexSignal& u,
                 const PolicyConfig& cfg, bool baseline) {
    cfg.validate();
    if (!(cfg.sigma2 > 0.0)) throw DomainError("policy_gradient_estimate: sigma_pi^2 = 0 has no score function");
    Prepared p;
    p.L = u.size();
    p.N = losses.size();
    if (p.N == 0 || x.size() != p.L || x_tilde.size() != p.L || p.L % p.N != 0)
        throw DomainError("policy_gradient_estimate: length mismatch");
    p.R = static_cast<int>(p.L / p.N);
    p.ref = std::sqrt(mean_power(u.samples));
    if (!(p.ref > 0.0)) throw DomainError("policy_gradient_estimate: all-zero input");
    p.l = losses;
    if (baseline) {
        double m = 0.0;
        for (double v : p.l) m += v;
        m /= static_cast<double>(p.N);
        for (double& v : p.l) v -= m;
    }
    return p;
}

}  // namespace

RVec policy_gradient_estimate(const RVec& losses, const ComplexSignal& x_tilde, const ComplexSignal& x,
                              const ComplexSignal& u, const DpdModel& model, const PolicyConfig& cfg,
                              const EstimatorOptions& opt) {
    const Prepared p = prepare(losses, x_tilde, x, u, cfg, opt.baseline);
    const long L = static_cast<long>(p.L);

    // loss weight of each sample: every symbol n whose window nR-G..nR+G covers it
    RVec wk(p.L, 0.0);
    for (std::size_t n = 0; n < p.N; ++n)
        for (int g = -cfg.G; g <= cfg.G; ++g) {
            const long k = static_cast<long>(n) * p.R + g;
            if (k >= 0 && k < L) wk[static_cast<std::size_t>(k)] += p.l[n];
        }

    const double a = std::sqrt(1.0 - cfg.sigma2);
    const double coef = 2.0 * a / cfg.sigma2 / static_cast<double>(p.N);
    const CVec raw = dpd_raw(u.samples, model);
    const bool batch_scale = !(model.frozen_scale > 0.0);
    const double s = batch_scale ? normalization_scale(u.samples, raw) : model.frozen_scale;

    CVec c(p.L), w(p.L);
    for (std::size_t k = 0; k < p.L; ++k) {
        c[k] = coef * wk[k] * (x_tilde[k] - a * x[k]);
        w[k] = (s / p.ref) * c[k];
    }
    if (opt.normalization_aware && batch_scale) {
        // d scale / d theta = -scale / (2 P_raw) * (2 / L) sum_j Re(conj(raw_j) d raw_j)
        double beta = 0.0, praw = 0.0;
        for (std::size_t k = 0; k < p.L; ++k) {
            beta += std::real(std::conj(c[k]) * raw[k]);
            praw += std::norm(raw[k]);
        }
        beta /= p.ref;
        praw /= static_cast<double>(p.L);
        const double f = beta * s / (praw * static_cast<double>(p.L));
        for (std::size_t k = 0; k < p.L; ++k) w[k] -= f * raw[k];
    }
    return dpd_raw_vjp(u.samples, model, w);
}

RVec policy_gradient_reference(const RVec& losses, const ComplexSignal& x_tilde, const ComplexSignal& x,
                               const ComplexSignal& u, const DpdModel& model, const PolicyConfig& cfg,
                               bool baseline) {
    const Prepared p = prepare(losses, x_tilde, x, u, cfg, baseline);
    const double s = model.frozen_scale > 0.0 ? model.frozen_scale
                                              : normalization_scale(u.samples, dpd_raw(u.samples, model));
    RVec grad(model.theta.size(), 0.0);
    for (std::size_t n = 0; n < p.N; ++n)
        for (int g = -cfg.G; g <= cfg.G; ++g) {
            const long k = static_cast<long>(n) * p.R + g;
            if (k < 0 || k >= static_cast<long>(p.L)) continue;
            const Jacobian J = dpd_param_jacobian(u.samples, static_cast<std::size_t>(k), model, s) / p.ref;
            const RVec lg = log_policy_grad(x_tilde[k], x[k], J, cfg.sigma2);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += p.l[n] * lg[i];
        }
    for (double& v : grad) v /= static_cast<double>(p.N);
    return grad;
}

namespace {

bool all_finite(const RVec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double norm2(const RVec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

RlResult rl_train(const Chain& chain, DpdModel model, const RlTrainConfig& cfg, const PolicyConfig& policy,
                  const Demapper& demapper, const CheckpointFn& on_checkpoint) {
    model.validate();
    policy.validate();
    if (cfg.N < 1 || cfg.NB < 1 || !(cfg.adam.lr > 0.0)) throw DomainError("rl_train: invalid training config");
    if (!(cfg.drive > 0.0)) throw DomainError("rl_train: drive must be positive");
    model.frozen_scale = 0.0;

    const Rng master(cfg.seed);
    Rng data = master.stream("train-data");
    Rng explore = master.stream("train-policy");
    Rng pa_noise = master.stream("train-pa");
    Rng ch_noise = master.stream("train-channel");

    const bool wide = chain.cfg.sample_rate >= 2.0 * (kAcprSpacing + kAcprBandwidth / 2.0);
    GainTracker tracker;
    AdamState adam;
    RlResult res;
    res.records.reserve(static_cast<std::size_t>(cfg.NB));
    DpdModel last_good = model;

    for (int j = 0; j < cfg.NB; ++j) try {
        Frame f = make_frame(cfg.N, chain.constellation, chain.shape, chain.cfg.sample_rate, data);
        for (auto& v : f.u.samples) v *= cfg.drive;
        const ComplexSignal x = dpd_forward(f.u, model);
        const double ref = std::sqrt(mean_power(f.u.samples));
        ComplexSignal xn = x;
        for (auto& v : xn.samples) v /= ref;
        const ComplexSignal xt = policy_sample(xn, policy.sigma2, explore);
        ComplexSignal pa_in = xt;
        for (auto& v : pa_in.samples) v *= ref;

        const ComplexSignal xp = chain.amplify(pa_in, pa_noise);
        const CVec z = chain.receive(chain.channel(xp, ch_noise));
        if (!tracker.ready()) tracker.update(f.symbols, z);
        const ProbabilityMatrix P = demap(tracker.equalize(z), demapper);
        tracker.update(f.symbols, z);
        const CeLoss ce = ce_loss(f.m, P);
        const RVec grad = policy_gradient_estimate(ce.per_example, xt, xn, f.u, model, policy, cfg.estimator);

        if (!std::isfinite(ce.mean) || !all_finite(grad))
            throw RlAbort("rl_train: non-finite loss or gradient at iteration " + std::to_string(j), last_good);
        last_good = model;
        adam_step(model.theta, grad, adam, cfg.adam);

        TrainRecord r;
        r.iteration = j;
        r.loss = ce.mean;
        r.grad_norm = norm2(grad);
        r.power_dbm = measure_power_dbm(xp);
        r.ser = ser(f.m, decide(P));
        r.nmse_db = nmse_db(xp.samples, f.u.samples);
        r.acpr_dbc = wide ? acpr(xp) : std::nan("");
        res.records.push_back(r);
        if (on_checkpoint && cfg.checkpoint_every > 0 && (j + 1) % cfg.checkpoint_every == 0) on_checkpoint(j + 1, model);
    } catch (const NumericError& e) {
        throw RlAbort(std::string("rl_train: ") + e.what() + " at iteration " + std::to_string(j), last_good);
    }

    // policy removed: freeze the normalization measured on fresh frames
    Rng cal = master.stream("train-calibration");
    double pu = 0.0, pr = 0.0;
    for (int i = 0; i < std::max(1, cfg.calibration_frames); ++i) {
        Frame f = make_frame(cfg.N, chain.constellation, chain.shape, chain.cfg.sample_rate, cal);
        for (auto& v : f.u.samples) v *= cfg.drive;
        const CVec raw = dpd_raw(f.u.samples, model);
        pu += mean_power(f.u.samples);
        pr += mean_power(raw);
    }
    model.frozen_scale = std::sqrt(pu / pr);
    res.model = model;
    return res;
}

}  // namespace otadpd
