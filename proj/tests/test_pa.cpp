#include <cmath>

#include "doctest.h"
#include "otadpd/chain.hpp"
#include "otadpd/gmp.hpp"
#include "otadpd/io.hpp"
#include "otadpd/metrics.hpp"
#include "otadpd/pa_model.hpp"
#include "otadpd/rng.hpp"

using namespace otadpd;

namespace {

CVec cnoise(std::size_t n, double var, Rng& rng) {
    CVec x(n);
    for (auto& v : x) v = rng.cgauss(var);
    return x;
}

ComplexSignal sig(CVec x) { return ComplexSignal{std::move(x), 200e6}; }

GmpConfig small_cfg() {
    GmpConfig g;
    g.Ka = 3, g.La = 2, g.Kb = 2, g.Lb = 2, g.Mb = 1, g.Kc = 2, g.Lc = 1, g.Mc = 1;
    return g;
}

}  // namespace

TEST_CASE("gmp basis row") {
    const GmpConfig def;
    CHECK(def.basis_count() == 63);
    CHECK(gmp_basis_row(CVec(10, 0.0), 5, def).size() == 63);
    for (auto v : gmp_basis_row(CVec(10, 0.0), 5, def)) CHECK(v == cplx(0.0, 0.0));

    GmpConfig lin = GmpConfig::linear(1);
    CHECK(lin.basis_count() == 1);
    const CVec x{cplx(1, 2), cplx(-0.5, 0.25), cplx(3, -1)};
    for (std::size_t n = 0; n < x.size(); ++n) {
        const CVec r = gmp_basis_row(x, n, lin);
        REQUIRE(r.size() == 1);
        CHECK(r[0] == x[n]);
    }
}

TEST_CASE("gmp basis row follows the documented column order") {
    // Ka=2 La=2, Kb=1 Lb=1 Mb=1, Kc=1 Lc=2 Mc=1
    GmpConfig g;
    g.Ka = 2, g.La = 2, g.Kb = 1, g.Lb = 1, g.Mb = 1, g.Kc = 1, g.Lc = 2, g.Mc = 1;
    const CVec x{cplx(0.3, 0.1), cplx(-1.0, 0.5), cplx(0.2, -0.7), cplx(0.9, 0.4)};
    const std::size_t n = 2;
    const CVec r = gmp_basis_row(x, n, g);
    const CVec expect{x[2], x[1], x[2] * std::abs(x[2]), x[1] * std::abs(x[1]),
                      x[2] * std::abs(x[1]),                 // b: l=0, m=1
                      x[2] * std::abs(x[3]), x[1] * std::abs(x[2])};  // c: l=0,1, m=1
    REQUIRE(r.size() == expect.size());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(r[i] - expect[i]) < 1e-15);
    // lags before the start and leads past the end read zero
    const CVec r0 = gmp_basis_row(x, 0, g);
    CHECK(r0[1] == cplx(0.0, 0.0));
    CHECK(r0[4] == cplx(0.0, 0.0));
    const CVec r3 = gmp_basis_row(x, 3, g);
    CHECK(r3[5] == cplx(0.0, 0.0));
}

TEST_CASE("linear clipping pa") {
    Rng rng(1);
    const ComplexSignal x = sig(cnoise(500, 4.0, rng));
    const ComplexSignal y = pa_forward(x, PaModel::linear_clipping(1.0, std::numeric_limits<double>::infinity()), rng);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);

    const ComplexSignal c = pa_forward(sig(CVec{cplx(1.0, 0.0)}), PaModel::linear_clipping(2.0, 1.0), rng);
    CHECK(c[0] == cplx(1.0, 0.0));

    const ComplexSignal z = pa_forward_clean(x, PaModel::linear_clipping(3.0, 2.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(z[i]) <= 2.0 + 1e-12);
        CHECK(std::abs(std::arg(z[i]) - std::arg(x[i])) < 1e-12);
    }
}

TEST_CASE("gmp pa with only the linear tap is a gain") {
    Rng rng(2);
    const GmpConfig g;
    CVec coeffs(g.basis_count(), 0.0);
    const cplx c(0.7, -1.3);
    coeffs[0] = c;
    const ComplexSignal x = sig(cnoise(300, 2.0, rng));
    const ComplexSignal y = pa_forward(x, PaModel::gmp(g, coeffs), rng);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - c * x[i]) < 1e-14);
}

TEST_CASE("gmp pa is linear in its coefficients") {
    Rng rng(3);
    const GmpConfig g;
    const CVec c1 = cnoise(g.basis_count(), 1e-2, rng), c2 = cnoise(g.basis_count(), 1e-2, rng);
    CVec c12(g.basis_count());
    for (std::size_t i = 0; i < c12.size(); ++i) c12[i] = c1[i] + c2[i];
    const ComplexSignal x = sig(cnoise(400, 1.0, rng));
    const ComplexSignal y1 = pa_forward_clean(x, PaModel::gmp(g, c1));
    const ComplexSignal y2 = pa_forward_clean(x, PaModel::gmp(g, c2));
    const ComplexSignal y12 = pa_forward_clean(x, PaModel::gmp(g, c12));
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(y12[i] - (y1[i] + y2[i])) <= 1e-12 * std::max(1.0, std::abs(y12[i])));
}

TEST_CASE("prepending zeros shifts the gmp output") {
    Rng rng(4);
    const GmpConfig g;
    const PaModel pa = PaModel::gmp(g, cnoise(g.basis_count(), 1e-2, rng));
    const CVec x = cnoise(200, 1.0, rng);
    CVec xp(7, 0.0);
    xp.insert(xp.end(), x.begin(), x.end());
    const ComplexSignal y = pa_forward_clean(sig(x), pa);
    const ComplexSignal yp = pa_forward_clean(sig(xp), pa);
    for (std::size_t i = 0; i < 7; ++i) CHECK(yp[i] == cplx(0.0, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(yp[i + 7] == y[i]);
}

TEST_CASE("measurement noise has the configured variance") {
    Rng rng(5);
    const ComplexSignal x = sig(CVec(200000, cplx(1.0, 0.0)));
    const ComplexSignal y = pa_forward(x, PaModel::linear_clipping(1.0, 1e9, 0.053), rng);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e += std::norm(y[i] - x[i]);
    CHECK(e / static_cast<double>(x.size()) == doctest::Approx(0.053 * 0.053).epsilon(0.02));
}

TEST_CASE("non-finite pa output reports the index") {
    Rng rng(6);
    CVec x(10, cplx(1.0, 0.0));
    x[4] = cplx(std::nan(""), 0.0);
    try {
        pa_forward(sig(x), PaModel::linear_clipping(1.0, 5.0), rng);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.index == 4);
    }
}

TEST_CASE("gmp_fit recovers a known model") {
    Rng rng(7);
    const GmpConfig g = small_cfg();
    CVec c = cnoise(g.basis_count(), 0.05, rng);
    c[0] = 1.0;
    const CVec x = cnoise(4000, 1.0, rng);
    const CVec y = gmp_apply(x, g, c);
    const GmpFit f = gmp_fit(x, y, g, 0.0);
    CHECK(f.nmse_db < -100.0);
    double e = 0.0, n = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        e += std::norm(f.coeffs[i] - c[i]);
        n += std::norm(c[i]);
    }
    CHECK(std::sqrt(e / n) < 1e-6);
}

TEST_CASE("gmp_fit on a full-size known model") {
    Rng rng(8);
    const GmpConfig g;
    CVec c = cnoise(g.basis_count(), 1e-4, rng);
    c[0] = cplx(1.0, 0.1);
    const CVec x = cnoise(8000, 1.0, rng);
    const GmpFit f = gmp_fit(x, gmp_apply(x, g, c), g, 0.0);
    CHECK(f.nmse_db < -100.0);
}

TEST_CASE("gmp_fit of a scaled copy") {
    Rng rng(9);
    const GmpConfig g;
    const CVec x = cnoise(2000, 1.0, rng);
    CVec y(x);
    for (auto& v : y) v *= 3.0;
    const GmpFit f = gmp_fit(x, y, g, 0.0);
    CHECK(std::abs(f.coeffs[0] - 3.0) < 1e-9);
    for (std::size_t i = 1; i < f.coeffs.size(); ++i) CHECK(std::abs(f.coeffs[i]) < 1e-8);
}

TEST_CASE("gmp_fit errors") {
    Rng rng(10);
    const GmpConfig g;
    const CVec few = cnoise(40, 1.0, rng);
    CHECK_THROWS_AS(gmp_fit(few, few, g, 0.0), DomainError);
    // constant envelope: |x|^k columns repeat the linear ones up to scale
    CVec ce(2000);
    for (auto& v : ce) v = std::polar(1.0, rng.uniform(0.0, 6.283));
    CHECK_THROWS_AS(gmp_fit(ce, ce, g, 0.0), IllConditionedError);
    CHECK_NOTHROW(gmp_fit(ce, ce, g, 1e-6));
}

TEST_CASE("reference pa") {
    ReferencePaInfo info;
    const PaModel a = make_reference_pa(7, &info);
    const PaModel b = make_reference_pa(7);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.sigma_meas == doctest::Approx(0.053));
    CHECK(a.x_sat == doctest::Approx(20.9));
    CHECK(info.fit_nmse_db < -35.0);

    const Chain chain(ChainConfig{}, a);
    Rng rng(99);

    SUBCASE("small signal is the linear memory part") {
        const Frame f = chain.frame(rng, 0.5);
        const CanonicalPa cp;
        CVec lin(f.u.size(), 0.0);
        for (std::size_t n = 0; n < lin.size(); ++n)
            for (std::size_t k = 0; k < cp.fir.size() && k <= n; ++k) lin[n] += cp.fir[k] * f.u[n - k];
        CHECK(nmse_db(pa_forward_clean(f.u, a).samples, lin) < -40.0);
    }
    SUBCASE("held-out fit against the canonical pa") {
        for (double drive : {8.0, 12.0, 16.0}) {
            const Frame f = chain.frame(rng, drive);
            CHECK(nmse_db(pa_forward_clean(f.u, a).samples, canonical_pa(f.u.samples)) < -35.0);
        }
    }
}

TEST_CASE("pa json round trip") {
    const PaModel a = make_reference_pa(3);
    const PaModel b = pa_from_json(pa_to_json(a));
    CHECK(b.coeffs == a.coeffs);
    CHECK(b.sigma_meas == a.sigma_meas);
    CHECK(b.x_sat == a.x_sat);
    CHECK(b.input_ceiling == a.input_ceiling);
    const PaModel lc = PaModel::linear_clipping(2.0, std::numeric_limits<double>::infinity());
    CHECK(std::isinf(pa_from_json(pa_to_json(lc)).x_sat));
}
