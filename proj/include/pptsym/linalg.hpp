#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace pptsym {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct Tolerances {
    double rank_rel_tol = 1e-8;
    double psd_tol = 1e-10;
    double hermitian_tol = 1e-12;
    double residual_tol = 1e-8;

    // Throws PreconditionError unless every value is positive and rank_rel_tol < 1.
    void validate() const;
    // Defaults overridden by PPTSYM_RANK_REL_TOL, PPTSYM_PSD_TOL,
    // PPTSYM_HERMITIAN_TOL and PPTSYM_RESIDUAL_TOL when set.
    static Tolerances from_env();
};

struct RankProfile {
    int rank = 0;
    CMat kernel_basis;      // columns, orthonormal
    CMat range_basis;       // columns, orthonormal
    CMat range_projector;
    RVec singular_values;   // descending
    RVec eigenvalues;       // ascending, signed
    double tolerance_used = 0.0;
    int kernel_dim() const { return static_cast<int>(kernel_basis.cols()); }
};

double hermiticity_defect(const CMat& m);
void require_hermitian(const CMat& m, const Tolerances& tol, const char* what);
CMat hermitian_part(const CMat& m);

// Rank, kernel and range of a Hermitian matrix from its eigendecomposition.
// Singular values are |eigenvalues|; an eigenvalue counts as zero when its
// magnitude is at most rank_rel_tol times the largest one.
RankProfile rank_profile(const CMat& m, const Tolerances& tol);

double min_eigenvalue(const CMat& m);

// <v|X^+|v> with the pseudo-inverse taken on the numerical range of X.
double pinv_quadratic_form(const RankProfile& p, const CVec& v);

// Relative distance of v from the numerical range: |(1-P)v| / |v|.
double range_residual(const RankProfile& p, const CVec& v);

// Orthonormal basis of the null space of a real matrix (right singular
// vectors with singular value <= tol * max(1, sigma_max)).
RMat real_null_space(const RMat& a, double tol);

// Lawson-Hanson nonnegative least squares: min |A x - b|, x >= 0.
RVec nnls(const RMat& a, const RVec& b, int max_iter = 0);

double binomial(int n, int k);

}  // namespace pptsym

namespace pptsym {
inline cplx ipow(cplx z, int n) {
    cplx r(1.0);
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}
}  // namespace pptsym
