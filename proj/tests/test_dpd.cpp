#include <cmath>

#include "doctest.h"
#include "otadpd/dpd_model.hpp"
#include "otadpd/gmp.hpp"
#include "otadpd/io.hpp"
#include "otadpd/rng.hpp"
#include "otadpd/signals.hpp"
#include "r2tdnn_oracle.hpp"

using namespace otadpd;

namespace {

ComplexSignal noise_signal(std::size_t n, double var, Rng& rng) {
    ComplexSignal x{CVec(n), 200e6};
    for (auto& v : x.samples) v = rng.cgauss(var);
    return x;
}

DpdModel random_r2tdnn(Rng& rng, double ref) {
    DpdModel m = make_r2tdnn_dpd(3, rng, ref);
    for (auto& t : m.theta) t = rng.uniform(-0.5, 0.5);
    return m;
}

}  // namespace

TEST_CASE("identity initialisations") {
    Rng rng(1);
    const ComplexSignal u = noise_signal(512, 9.0, rng);

    DpdModel g = make_gmp_dpd(GmpConfig{}, 20.9);
    CHECK(g.param_count() == 126);
    double s = 0.0;
    ComplexSignal x = dpd_forward(u, g, &s);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(x[i] - u[i]) < 1e-12);

    DpdModel r = make_r2tdnn_dpd(3, rng, 20.9);
    CHECK(r.net.widths == std::vector<int>{8, 12, 12, 2});
    CHECK(r.param_count() == 8 * 12 + 12 + 12 * 12 + 12 + 12 * 2 + 2);
    x = dpd_forward(u, r, &s);  // zero output layer
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(x[i] - u[i]) < 1e-12);

    std::fill(r.theta.begin(), r.theta.end(), 0.0);
    x = dpd_forward(u, r, &s);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(x[i] - u[i]) < 1e-12);
}

TEST_CASE("normalization matches input power and is idempotent") {
    Rng rng(2);
    const ComplexSignal u = noise_signal(1024, 50.0, rng);
    DpdModel g = make_gmp_dpd(GmpConfig{}, 20.9);
    for (auto& t : g.theta) t += 0.05 * rng.normal();
    for (const DpdModel& m : {g, random_r2tdnn(rng, 20.9)}) {
        const ComplexSignal x = dpd_forward(u, m);
        CHECK(std::abs(mean_power(x.samples) / mean_power(u.samples) - 1.0) <= 1e-9);
        CHECK(normalization_scale(u.samples, x.samples) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("frozen scale is used when set") {
    Rng rng(3);
    const ComplexSignal u = noise_signal(256, 4.0, rng);
    DpdModel m = random_r2tdnn(rng, 5.0);
    m.frozen_scale = 0.37;
    const CVec raw = dpd_raw(u.samples, m);
    double s = 0.0;
    const ComplexSignal x = dpd_forward(u, m, &s);
    CHECK(s == 0.37);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(x[i] - 0.37 * raw[i]) < 1e-14);
}

TEST_CASE("gmp jacobian columns are the basis row") {
    Rng rng(4);
    const double ref = 20.9, scale = 1.7;
    const ComplexSignal u = noise_signal(64, 100.0, rng);
    DpdModel m = make_gmp_dpd(GmpConfig{}, ref);
    for (auto& t : m.theta) t += 0.1 * rng.normal();
    CVec un(u.samples);
    for (auto& v : un) v /= ref;
    for (std::size_t n : {0u, 1u, 30u, 63u}) {
        const CVec row = gmp_basis_row(un, n, m.cfg);
        const Jacobian J = dpd_param_jacobian(u.samples, n, m, scale);
        REQUIRE(J.cols() == static_cast<Eigen::Index>(2 * row.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            const cplx dre = scale * ref * row[i], dim = scale * ref * cplx(0.0, 1.0) * row[i];
            CHECK(J(0, 2 * i) == doctest::Approx(dre.real()).epsilon(1e-12));
            CHECK(J(1, 2 * i) == doctest::Approx(dre.imag()).epsilon(1e-12));
            CHECK(J(0, 2 * i + 1) == doctest::Approx(dim.real()).epsilon(1e-12));
            CHECK(J(1, 2 * i + 1) == doctest::Approx(dim.imag()).epsilon(1e-12));
        }
    }
    const Jacobian Z = dpd_param_jacobian(CVec(16, 0.0), 8, m, scale);
    CHECK(Z.cwiseAbs().maxCoeff() == 0.0);
    // independent of theta
    DpdModel m2 = m;
    for (auto& t : m2.theta) t = rng.normal();
    CHECK((dpd_param_jacobian(u.samples, 10, m, scale) - dpd_param_jacobian(u.samples, 10, m2, scale)).norm() == 0.0);
}

TEST_CASE("r2tdnn jacobian against long double finite differences") {
    Rng rng(5);
    int checked = 0;
    for (int draw = 0; draw < 10; ++draw) {
        const double ref = 10.0;
        const ComplexSignal u = noise_signal(16, 100.0, rng);
        const DpdModel m = random_r2tdnn(rng, ref);
        const std::size_t n = 3 + static_cast<std::size_t>(draw % 10);
        std::vector<oracle::ld> th(m.theta.begin(), m.theta.end());
        if (oracle::r2tdnn_raw(u.samples, n, m, th).min_abs_preact < 1e-3) continue;
        const Jacobian J = dpd_param_jacobian(u.samples, n, m, 1.0);
        const oracle::ld h = 1e-5L;
        for (std::size_t p = 0; p < th.size(); ++p) {
            auto tp = th, tm = th;
            tp[p] += h;
            tm[p] -= h;
            const auto a = oracle::r2tdnn_raw(u.samples, n, m, tp), b = oracle::r2tdnn_raw(u.samples, n, m, tm);
            const double fre = static_cast<double>((a.re - b.re) / (2 * h));
            const double fim = static_cast<double>((a.im - b.im) / (2 * h));
            for (auto [fd, an] : {std::pair{fre, J(0, static_cast<Eigen::Index>(p))},
                                  std::pair{fim, J(1, static_cast<Eigen::Index>(p))}}) {
                if (std::abs(fd) <= 1e-8) continue;
                CHECK(std::abs(an - fd) / std::abs(fd) < 1e-5);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("jacobian predicts small parameter steps to second order") {
    Rng rng(6);
    const ComplexSignal u = noise_signal(32, 25.0, rng);
    const DpdModel m = random_r2tdnn(rng, 5.0);
    const std::size_t n = 20;
    RVec v(m.param_count());
    double nv = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        nv += x * x;
    }
    for (auto& x : v) x /= std::sqrt(nv);
    const Jacobian J = dpd_param_jacobian(u.samples, n, m, 1.0);
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::Vector2d Jv = J * vv;
    const cplx f0 = dpd_raw(u.samples, m)[n];
    double res[2];
    int k = 0;
    for (double eps : {1e-3, 1e-4}) {
        DpdModel p = m;
        for (std::size_t i = 0; i < v.size(); ++i) p.theta[i] += eps * v[i];
        const cplx d = dpd_raw(u.samples, p)[n] - f0;
        res[k++] = std::hypot(d.real() - eps * Jv(0), d.imag() - eps * Jv(1));
    }
    // quadratic decay: a 10x smaller step leaves a ~100x smaller residual
    CHECK(res[1] > 0.0);
    CHECK(res[0] / res[1] > 50.0);
    CHECK(res[0] / res[1] < 200.0);
}

TEST_CASE("vjp and sparse evaluation agree with the dense forms") {
    Rng rng(7);
    const ComplexSignal u = noise_signal(64, 16.0, rng);
    DpdModel g = make_gmp_dpd(GmpConfig{}, 8.0);
    for (auto& t : g.theta) t += 0.05 * rng.normal();
    for (const DpdModel& m : {g, random_r2tdnn(rng, 8.0)}) {
        CVec w(u.size());
        for (auto& x : w) x = rng.cgauss(1.0);
        const RVec vjp = dpd_raw_vjp(u.samples, m, w);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.param_count()));
        for (std::size_t n = 0; n < u.size(); ++n) {
            const Jacobian J = dpd_param_jacobian(u.samples, n, m, 1.0);
            acc += J.transpose() * Eigen::Vector2d(w[n].real(), w[n].imag());
        }
        for (std::size_t i = 0; i < vjp.size(); ++i)
            CHECK(vjp[i] == doctest::Approx(acc(static_cast<Eigen::Index>(i))).epsilon(1e-10).scale(1.0));

        const std::vector<std::size_t> idx{0, 5, 17, 63};
        const CVec full = dpd_raw(u.samples, m), part = dpd_raw(u.samples, m, idx);
        CVec ws(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            CHECK(std::abs(part[j] - full[idx[j]]) < 1e-14 * std::max(1.0, std::abs(full[idx[j]])));
            ws[j] = w[idx[j]];
        }
        CVec wd(u.size(), 0.0);
        for (std::size_t j = 0; j < idx.size(); ++j) wd[idx[j]] = w[idx[j]];
        const RVec a = dpd_raw_vjp(u.samples, m, idx, ws), b = dpd_raw_vjp(u.samples, m, wd);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("dpd json round trip") {
    Rng rng(8);
    DpdModel m = random_r2tdnn(rng, 12.5);
    m.frozen_scale = 0.9;
    const DpdModel b = dpd_from_json(dpd_to_json(m));
    CHECK(b.theta == m.theta);
    CHECK(b.net.widths == m.net.widths);
    CHECK(b.K1 == m.K1);
    CHECK(b.amplitude_ref == m.amplitude_ref);
    CHECK(b.frozen_scale == m.frozen_scale);
    DpdModel g = make_gmp_dpd(GmpConfig{}, 3.0);
    g.theta[5] = 0.25;
    CHECK(dpd_from_json(dpd_to_json(g)).gmp_coeffs() == g.gmp_coeffs());
}

TEST_CASE("invalid models are rejected") {
    Rng rng(9);
    DpdModel m = make_r2tdnn_dpd(3, rng, 1.0);
    m.theta.pop_back();
    CHECK_THROWS_AS(m.validate(), DomainError);
    CHECK_THROWS_AS(make_gmp_dpd(GmpConfig{}, 0.0), DomainError);
}
