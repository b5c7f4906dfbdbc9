#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "doctest.h"
#include "otadpd/chain.hpp"
#include "otadpd/ila.hpp"
#include "otadpd/metrics.hpp"
#include "otadpd/rng.hpp"

using namespace otadpd;

namespace {

ComplexSignal tone(double f, double fs, std::size_t n) {
    ComplexSignal x{CVec(n), fs};
    for (std::size_t i = 0; i < n; ++i) x[i] = std::polar(1.0, 2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
    return x;
}

double peak_freq(const ComplexSignal& x) {
    const SpectrumEstimate s = welch_psd(x);
    std::size_t k = 0;
    for (std::size_t i = 1; i < s.psd.size(); ++i)
        if (s.psd[i] > s.psd[k]) k = i;
    return s.freq_hz[k];
}

const PaModel& ref_pa() {
    static const PaModel pa = make_reference_pa(7);
    return pa;
}

}  // namespace

TEST_CASE("feedback capture at full rate is the identity") {
    Rng rng(1);
    const Chain ch(ChainConfig{}, PaModel::linear_clipping(1.0, 1e9));
    const Frame f = ch.frame(rng, 5.0);
    const ComplexSignal c = feedback_capture(f.u, FeedbackAdc{200e6});
    CHECK(c.samples == f.u.samples);
    CHECK(c.sample_rate == f.u.sample_rate);
    CHECK_THROWS_AS(feedback_capture(f.u, FeedbackAdc{250e6}), DomainError);
    CHECK_THROWS_AS(feedback_capture(f.u, FeedbackAdc{0.0}), DomainError);
}

TEST_CASE("undersampled capture folds a tone") {
    // 300 cycles of 150 MHz in 1100 samples at 550 MHz, a whole number of periods
    const ComplexSignal x = tone(150e6, 550e6, 8800);
    const ComplexSignal s = adc_sample(x, FeedbackAdc{220e6});
    CHECK(s.sample_rate == 220e6);
    CHECK(std::abs(peak_freq(s) - (-70e6)) < s.sample_rate / 1024);
    const ComplexSignal c = feedback_capture(x, FeedbackAdc{220e6});
    CHECK(c.sample_rate == 550e6);
    CHECK(c.size() == x.size());
    CHECK(std::abs(peak_freq(c) - (-70e6)) < c.sample_rate / 1024);
}

TEST_CASE("in-band signals survive undersampled capture") {
    Rng rng(2);
    const Chain ch(ChainConfig{}, PaModel::linear_clipping(1.0, 1e9));
    const Frame f = ch.frame(rng, 5.0);
    for (double rate : {110e6, 150e6, 180e6}) CHECK(nmse_db(feedback_capture(f.u, FeedbackAdc{rate}).samples, f.u.samples) < -40.0);
}

TEST_CASE("ila on an identity pa returns the identity") {
    Rng rng(3);
    const PaModel pa = PaModel::linear_clipping(1.0, std::numeric_limits<double>::infinity());
    ChainConfig cc;
    cc.N = 4096;
    const Chain ch(cc, pa);
    const Frame f = ch.frame(rng, 10.0);
    const IlaResult r = ila_train(f.u, pa, FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, 25.0), IlaConfig{}, rng);
    CHECK(r.records.size() == 3);
    CHECK(r.model.frozen_scale > 0.0);
    const Frame t = ch.frame(rng, 10.0);
    CHECK(nmse_db(dpd_forward(t.u, r.model).samples, t.u.samples) < -50.0);
}

TEST_CASE("ila inverts a pure gain") {
    Rng rng(4);
    const double g = 2.5;
    const PaModel pa = PaModel::linear_clipping(g, std::numeric_limits<double>::infinity());
    ChainConfig cc;
    cc.N = 2048;
    const Chain ch(cc, pa);
    const Frame f = ch.frame(rng, 3.0);
    IlaConfig cfg;
    cfg.iters = 1;
    cfg.gain_normalize = false;
    cfg.ridge = 0.0;
    const IlaResult r = ila_train(f.u, pa, FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, 10.0), cfg, rng);
    const CVec c = r.model.gmp_coeffs();
    CHECK(std::abs(c[0] - 1.0 / g) < 1e-8);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-8);
}

TEST_CASE("ila residual is the least-squares minimum") {
    Rng rng(5);
    PaModel pa = ref_pa();
    pa.sigma_meas = 0.0;
    ChainConfig cc;
    cc.N = 2048;
    const Chain ch(cc, pa);
    const Frame f = ch.frame(rng, 9.0);
    const double ref = 25.0;
    IlaConfig cfg;
    cfg.iters = 1;
    cfg.ridge = 0.0;
    const IlaResult r = ila_train(f.u, pa, FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, ref), cfg, rng);

    // brute force: SVD solve on the unscaled basis of the gain-normalized capture
    const CVec& x = f.u.samples;  // identity predistorter
    const CVec y = pa_forward_clean(f.u, pa).samples;
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::conj(x[i]) * y[i];
        den += std::norm(x[i]);
    }
    const cplx alpha = num / den;
    CVec in(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) in[i] = y[i] / alpha / ref;
    const GmpConfig cfg_g;
    const BasisMatrix B = gmp_basis_matrix(in, cfg_g);
    Eigen::VectorXcd t(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) t(static_cast<Eigen::Index>(i)) = x[i] / ref;
    const Eigen::MatrixXcd Bd = B;
    const Eigen::VectorXcd c = Bd.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(t);
    const double brute = ref * ref * (Bd * c - t).squaredNorm() / static_cast<double>(x.size());
    REQUIRE(r.post_mse.size() == 1);
    CHECK(r.post_mse[0] == doctest::Approx(brute).epsilon(1e-6));
}

TEST_CASE("undersampled capture never fits better than full rate") {
    PaModel pa = ref_pa();
    ChainConfig cc;
    cc.N = 2048;
    const Chain ch(cc, pa);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        IlaConfig cfg;
        cfg.iters = 1;
        Rng a(seed), b(seed);
        const Frame fa = ch.frame(a, 10.0);
        const Frame fb = ch.frame(b, 10.0);
        const IlaResult full = ila_train(fa.u, pa, FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, 25.0), cfg, a);
        const IlaResult low = ila_train(fb.u, pa, FeedbackAdc{110e6}, make_gmp_dpd(GmpConfig{}, 25.0), cfg, b);
        CHECK(low.post_mse[0] >= full.post_mse[0]);
    }
}

TEST_CASE("ila records and arguments") {
    Rng rng(6);
    const Chain ch(ChainConfig{}, ref_pa());
    const Frame f = ch.frame(rng, 8.0);
    IlaConfig cfg;
    cfg.iters = 0;
    CHECK_THROWS_AS(ila_train(f.u, ref_pa(), FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, 25.0), cfg, rng), DomainError);
    cfg.iters = 2;
    const IlaResult r = ila_train(f.u, ref_pa(), FeedbackAdc{200e6}, make_gmp_dpd(GmpConfig{}, 25.0), cfg, rng);
    REQUIRE(r.records.size() == 2);
    for (const auto& rec : r.records) {
        CHECK(std::isfinite(rec.loss));
        CHECK(std::isfinite(rec.nmse_db));
        CHECK(std::isfinite(rec.acpr_dbc));
    }
}

TEST_CASE("ila with an r2tdnn postdistorter reduces the residual") {
    Rng rng(7);
    const Chain ch(ChainConfig{}, ref_pa());
    const Frame f = ch.frame(rng, 8.0);
    IlaConfig cfg;
    cfg.iters = 1;
    cfg.nn_steps = 300;
    Rng init(8);
    const DpdModel m0 = make_r2tdnn_dpd(3, init, 25.0);
    const IlaResult r = ila_train(f.u, ref_pa(), FeedbackAdc{200e6}, m0, cfg, rng);
    // residual of the untrained (identity) postdistorter on the same capture
    const ComplexSignal y = pa_forward_clean(f.u, ref_pa());
    const cplx a = fitted_gain(y.samples, f.u.samples);
    double base = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) base += std::norm(y[i] / a - f.u[i]);
    base /= static_cast<double>(y.size());
    CHECK(r.post_mse[0] < base);
}
