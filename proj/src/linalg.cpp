#include "pptsym/linalg.hpp"

#include "pptsym/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace pptsym {

void Tolerances::validate() const {
    if (!(rank_rel_tol > 0 && rank_rel_tol < 1 && psd_tol > 0 && hermitian_tol > 0 &&
          residual_tol > 0))
        throw PreconditionError("tolerances must be positive and rank_rel_tol < 1");
}

namespace {
void env_override(const char* name, double& value) {
    const char* s = std::getenv(name);
    if (!s || !*s) return;
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw PreconditionError(std::string("cannot parse ") + name + "=" + s);
    value = v;
}
}  // namespace

Tolerances Tolerances::from_env() {
    Tolerances t;
    env_override("PPTSYM_RANK_REL_TOL", t.rank_rel_tol);
    env_override("PPTSYM_PSD_TOL", t.psd_tol);
    env_override("PPTSYM_HERMITIAN_TOL", t.hermitian_tol);
    env_override("PPTSYM_RESIDUAL_TOL", t.residual_tol);
    t.validate();
    return t;
}

double hermiticity_defect(const CMat& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const CMat& m, const Tolerances& tol, const char* what) {
    if (m.rows() != m.cols()) throw PreconditionError(std::string(what) + ": not square");
    if (!m.allFinite()) throw PreconditionError(std::string(what) + ": non-finite entries");
    if (m.size() == 0) return;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff() * static_cast<double>(m.rows()));
    if (hermiticity_defect(m) > tol.hermitian_tol * scale)
        throw PreconditionError(std::string(what) + ": not Hermitian");
}

CMat hermitian_part(const CMat& m) { return (m + m.adjoint()) * 0.5; }

RankProfile rank_profile(const CMat& m, const Tolerances& tol) {
    require_hermitian(m, tol, "rank_profile");
    const Eigen::Index n = m.rows();
    RankProfile p;
    p.tolerance_used = tol.rank_rel_tol;
    if (n == 0) {
        p.range_projector = CMat(0, 0);
        return p;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
    const RVec& ev = es.eigenvalues();
    p.eigenvalues = ev;
    p.singular_values = ev.cwiseAbs();
    std::sort(p.singular_values.data(), p.singular_values.data() + n, std::greater<double>());
    double smax = p.singular_values(0);
    double cut = tol.rank_rel_tol * smax;
    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (smax > 0 && std::abs(ev(i)) > cut)
            keep.push_back(i);
        else
            drop.push_back(i);
    }
    p.rank = static_cast<int>(keep.size());
    p.range_basis.resize(n, keep.size());
    p.kernel_basis.resize(n, drop.size());
    for (size_t j = 0; j < keep.size(); ++j) p.range_basis.col(j) = es.eigenvectors().col(keep[j]);
    for (size_t j = 0; j < drop.size(); ++j) p.kernel_basis.col(j) = es.eigenvectors().col(drop[j]);
    p.range_projector = p.range_basis * p.range_basis.adjoint();
    return p;
}

double min_eigenvalue(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double pinv_quadratic_form(const RankProfile& p, const CVec& v) {
    // eigenvalues of the range part, matched to range_basis columns
    CVec c = p.range_basis.adjoint() * v;
    double s = 0.0;
    Eigen::Index j = 0;
    double smax = p.singular_values.size() ? p.singular_values(0) : 0.0;
    for (Eigen::Index i = 0; i < p.eigenvalues.size(); ++i) {
        if (smax > 0 && std::abs(p.eigenvalues(i)) > p.tolerance_used * smax) {
            s += std::norm(c(j)) / p.eigenvalues(i);
            ++j;
        }
    }
    return s;
}

double range_residual(const RankProfile& p, const CVec& v) {
    double nv = v.norm();
    if (nv == 0) return 0.0;
    CVec r = v - p.range_projector * v;
    return r.norm() / nv;
}

RMat real_null_space(const RMat& a, double tol) {
    const Eigen::Index n = a.cols();
    if (a.rows() == 0) return RMat::Identity(n, n);
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++r;
    return svd.matrixV().rightCols(n - r);
}

RVec nnls(const RMat& a, const RVec& b, int max_iter) {
    const Eigen::Index n = a.cols();
    if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
    RVec x = RVec::Zero(n);
    std::vector<bool> passive(n, false);
    const double eps = 1e-14 * std::max(1.0, a.norm() * std::max(1.0, b.norm()));
    auto solve_passive = [&](RVec& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (passive[i]) idx.push_back(i);
        z = RVec::Zero(n);
        if (idx.empty()) return;
        RMat ap(a.rows(), idx.size());
        for (size_t j = 0; j < idx.size(); ++j) ap.col(j) = a.col(idx[j]);
        RVec zp = ap.colPivHouseholderQr().solve(b);
        for (size_t j = 0; j < idx.size(); ++j) z(idx[j]) = zp(j);
    };
    for (int outer = 0; outer < max_iter; ++outer) {
        RVec w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double wmax = eps;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!passive[i] && w(i) > wmax) {
                wmax = w(i);
                best = i;
            }
        if (best < 0) break;
        passive[best] = true;
        for (int inner = 0; inner < max_iter; ++inner) {
            RVec z;
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[i] && z(i) <= 0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[i] && z(i) <= 0) alpha = std::min(alpha, x(i) / (x(i) - z(i)));
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[i] && std::abs(x(i)) <= 1e-15) {
                    passive[i] = false;
                    x(i) = 0;
                }
        }
    }
    return x;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

}  // namespace pptsym
