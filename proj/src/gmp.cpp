#include "otadpd/gmp.hpp"

#include <algorithm>
#include <cmath>

namespace otadpd {

std::size_t GmpConfig::basis_count() const {
    return static_cast<std::size_t>(Ka * La + Kb * Lb * Mb + Kc * Lc * Mc);
}

void GmpConfig::validate() const {
    for (int v : {Ka, La, Kb, Lb, Mb, Kc, Lc, Mc})
        if (v < 0) throw DomainError("GmpConfig: negative order or length");
    if (Ka < 1 || La < 1) throw DomainError("GmpConfig: aligned terms need Ka >= 1 and La >= 1");
}

GmpConfig GmpConfig::linear(int memory) {
    GmpConfig c;
    c.Ka = 1;
    c.La = memory;
    c.Kb = c.Lb = c.Mb = 0;
    c.Kc = c.Lc = c.Mc = 0;
    return c;
}

namespace {
inline cplx at(const CVec& x, long i) {
    return (i < 0 || i >= static_cast<long>(x.size())) ? cplx(0.0) : x[static_cast<std::size_t>(i)];
}

inline double ipow(double a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a;
    return r;
}
}  // namespace

void gmp_basis_row(const CVec& x, std::size_t n_, const GmpConfig& cfg, cplx* row) {
    const long n = static_cast<long>(n_);
    std::size_t c = 0;
    for (int k = 1; k <= cfg.Ka; ++k)
        for (int l = 0; l < cfg.La; ++l) {
            const cplx v = at(x, n - l);
            row[c++] = v * ipow(std::abs(v), k - 1);
        }
    for (int k = 1; k <= cfg.Kb; ++k)
        for (int l = 0; l < cfg.Lb; ++l)
            for (int m = 1; m <= cfg.Mb; ++m) row[c++] = at(x, n - l) * ipow(std::abs(at(x, n - l - m)), k);
    for (int k = 1; k <= cfg.Kc; ++k)
        for (int l = 0; l < cfg.Lc; ++l)
            for (int m = 1; m <= cfg.Mc; ++m) row[c++] = at(x, n - l) * ipow(std::abs(at(x, n - l + m)), k);
}

CVec gmp_basis_row(const CVec& x, std::size_t n, const GmpConfig& cfg) {
    CVec r(cfg.basis_count());
    gmp_basis_row(x, n, cfg, r.data());
    return r;
}

BasisMatrix gmp_basis_matrix(const CVec& x, const GmpConfig& cfg) {
    BasisMatrix B(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(cfg.basis_count()));
    for (std::size_t n = 0; n < x.size(); ++n) gmp_basis_row(x, n, cfg, B.row(static_cast<Eigen::Index>(n)).data());
    return B;
}

CVec gmp_apply(const CVec& x, const GmpConfig& cfg, const CVec& coeffs) {
    const std::size_t P = cfg.basis_count();
    if (coeffs.size() != P) throw DomainError("gmp_apply: coefficient count does not match config");
    CVec row(P), y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        gmp_basis_row(x, n, cfg, row.data());
        cplx acc = 0.0;
        for (std::size_t i = 0; i < P; ++i) acc += row[i] * coeffs[i];
        y[n] = acc;
    }
    return y;
}

GmpFit gmp_fit(const BasisMatrix& B, const CVec& x_out, double ridge) {
    const Eigen::Index N = B.rows(), P = B.cols();
    if (static_cast<Eigen::Index>(x_out.size()) != N) throw DomainError("gmp_fit: length mismatch");
    if (N < 4 * P) throw DomainError("gmp_fit: need at least 4x basis-count samples");
    if (ridge < 0.0) throw DomainError("gmp_fit: negative ridge");

    Eigen::VectorXd scale(P);
    for (Eigen::Index j = 0; j < P; ++j) {
        const double s = B.col(j).norm();
        scale(j) = s > 0.0 ? s : 1.0;
    }
    const Eigen::Index rows = ridge > 0.0 ? N + P : N;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, P);
    A.topRows(N) = B * scale.cwiseInverse().asDiagonal();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(rows);
    rhs.head(N) = Eigen::Map<const Eigen::VectorXcd>(x_out.data(), N);
    if (ridge > 0.0) A.bottomRows(P).diagonal().setConstant(std::sqrt(ridge));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
    if (ridge == 0.0 && qr.rank() < P)
        throw IllConditionedError("gmp_fit: basis is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                                  std::to_string(P) + "); use a ridge > 0");
    Eigen::VectorXcd c = qr.solve(rhs);
    c = c.cwiseQuotient(scale.cast<cplx>());

    GmpFit out;
    out.coeffs.assign(c.data(), c.data() + P);
    const Eigen::VectorXcd yhat = B * c;
    double e = 0.0, r = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        e += std::norm(x_out[n] - yhat(n));
        r += std::norm(x_out[n]);
    }
    out.nmse_db = (r > 0.0 && e > 0.0) ? 10.0 * std::log10(e / r) : -200.0;
    if (!std::isfinite(out.nmse_db)) throw NumericError("gmp_fit: non-finite residual", 0);
    return out;
}

GmpFit gmp_fit(const CVec& x_in, const CVec& x_out, const GmpConfig& cfg, double ridge) {
    cfg.validate();
    if (x_in.size() != x_out.size()) throw DomainError("gmp_fit: length mismatch");
    if (x_in.size() < 4 * cfg.basis_count()) throw DomainError("gmp_fit: need at least 4x basis-count samples");
    return gmp_fit(gmp_basis_matrix(x_in, cfg), x_out, ridge);
}

}  // namespace otadpd
