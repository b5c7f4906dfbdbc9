#pragma once

#include <Eigen/Dense>

#include "otadpd/types.hpp"

namespace otadpd {

// Generalized memory polynomial structure.
//   a-terms  x[n-l] |x[n-l]|^(k-1)     k = 1..Ka, l = 0..La-1
//   b-terms  x[n-l] |x[n-l-m]|^k       k = 1..Kb, l = 0..Lb-1, m = 1..Mb   (lagging envelope)
//   c-terms  x[n-l] |x[n-l+m]|^k       k = 1..Kc, l = 0..Lc-1, m = 1..Mc   (leading envelope)
// Canonical column order: a-terms (k outer, l inner), then b-terms, then
// c-terms (k, l, m from outer to inner). Samples outside the signal read as 0.
struct GmpConfig {
    int Ka = 7, La = 3;
    int Kb = 7, Lb = 3, Mb = 1;
    int Kc = 7, Lc = 3, Mc = 1;

    std::size_t basis_count() const;
    void validate() const;
    static GmpConfig linear(int memory = 1);
};

using BasisMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Writes basis_count() entries to row.
void gmp_basis_row(const CVec& x, std::size_t n, const GmpConfig& cfg, cplx* row);
CVec gmp_basis_row(const CVec& x, std::size_t n, const GmpConfig& cfg);
BasisMatrix gmp_basis_matrix(const CVec& x, const GmpConfig& cfg);

// y[n] = row(n) . c
CVec gmp_apply(const CVec& x, const GmpConfig& cfg, const CVec& coeffs);

struct GmpFit {
    CVec coeffs;
    double nmse_db = 0.0;
};

constexpr double kDefaultRidge = 1e-9;

// Least squares (Householder QR with column pivoting) on unit-norm columns;
// ridge adds lambda * |c_equilibrated|^2 via an augmented system.
GmpFit gmp_fit(const CVec& x_in, const CVec& x_out, const GmpConfig& cfg, double ridge = kDefaultRidge);
GmpFit gmp_fit(const BasisMatrix& B, const CVec& x_out, double ridge);

}  // namespace otadpd
