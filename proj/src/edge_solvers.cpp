#include "pptsym/classify.hpp"
#include "pptsym/errors.hpp"
#include "pptsym/nls.hpp"
#include "pptsym/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pptsym {

namespace {

using poly::Poly;

const double kS3[4] = {1.0, std::sqrt(3.0), std::sqrt(3.0), 1.0};
const double kS2[3] = {1.0, std::sqrt(2.0), 1.0};

double scale_of(cplx a) { return std::max(1.0, std::abs(a)); }

void push_unique(std::vector<Alpha>& out, const Alpha& a) {
    for (const Alpha& b : out) {
        if (a.infinite || b.infinite) {
            if (a.infinite && b.infinite) return;
            continue;
        }
        if (std::abs(a.value - b.value) <= 1e-8 * scale_of(a.value)) return;
    }
    out.push_back(a);
}

// |<v|psi>| / (|v| |psi|) for the conjugated product vector v of S_k (x) S_{4-k}.
double overlap(const CVec& psi, const Alpha& a, int k) {
    CVec v = conjugated_product_dicke(a, k, 4);
    double n = v.norm() * psi.norm();
    return n == 0 ? 0.0 : std::abs(v.dot(psi)) / n;
}

// Newton/LM refinement of alpha on a list of complex equations.
cplx polish(cplx a0, const std::function<std::vector<cplx>(cplx)>& eqs) {
    const int m = 2 * static_cast<int>(eqs(a0).size());
    ResidualFn f = [&](const RVec& x, RVec& r) {
        auto e = eqs(cplx(x(0), x(1)));
        for (size_t i = 0; i < e.size(); ++i) {
            r(2 * i) = e[i].real();
            r(2 * i + 1) = e[i].imag();
        }
    };
    RVec x0(2);
    x0 << a0.real(), a0.imag();
    LsqResult res = least_squares(f, std::max(m, 2), x0, 200);
    cplx a(res.x(0), res.x(1));
    auto norm_of = [&](cplx z) {
        double s = 0;
        for (cplx c : eqs(z)) s += std::norm(c);
        return s;
    };
    return norm_of(a) <= norm_of(a0) ? a : a0;
}

}  // namespace

CMat kernel_matrix(const CVec& psi) {
    if (psi.size() != 9) throw SizeError("expected a vector of S_2 (x) S_2 (length 9)");
    CMat t(3, 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) t(a, b) = psi(a * 3 + b);
    return t;
}

double g_symmetry_residual(const CVec& psi) {
    CMat t = kernel_matrix(psi);
    double n = t.norm();
    return n == 0 ? 0.0 : (t - t.adjoint()).norm() / n;
}

namespace {
// Rotates the phase of psi so that its matrix is as Hermitian as possible.
CMat hermitian_kernel_matrix(const CVec& psi, double tol) {
    CMat t = kernel_matrix(psi);
    double n2 = t.squaredNorm();
    if (n2 == 0) throw PreconditionError("zero kernel vector");
    cplx ph = (t.conjugate().cwiseProduct(t.adjoint())).sum() / n2;  // <T, T^dag> / |T|^2
    if (std::abs(ph) > 0.5) t *= std::sqrt(ph / std::abs(ph));
    if ((t - t.adjoint()).norm() / std::sqrt(n2) > tol)
        throw PreconditionError("kernel vector violates the swap-conjugation symmetry");
    return hermitian_part(t);
}
}  // namespace

CMat SymmetricKernelSchmidt::w() const {
    CMat m = CMat::Zero(3, 3);
    for (size_t k = 0; k < vectors.size(); ++k) m += lambdas[k] * vectors[k] * vectors[k].adjoint();
    return m;
}

SymmetricKernelSchmidt kernel_schmidt_symmetric(const CVec& psi) {
    if (g_symmetry_residual(psi) > 1e-8) throw PreconditionError("kernel vector is not swap-conjugation symmetric");
    CMat t = hermitian_part(kernel_matrix(psi));
    // Psi = sum_k lambda_k |e_k*>|e_k>  <=>  T^T = sum_k lambda_k e_k e_k^dag.
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(t.transpose()));
    SymmetricKernelSchmidt out;
    CVec rec = CVec::Zero(9);
    for (int k = 2; k >= 0; --k) {
        out.lambdas.push_back(es.eigenvalues()(k));
        CVec e = es.eigenvectors().col(k);
        out.vectors.push_back(e);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) rec(a * 3 + b) += es.eigenvalues()(k) * std::conj(e(a)) * e(b);
    }
    out.reconstruction_error = (rec - psi).norm();
    return out;
}

std::vector<Alpha> solve_rho_kernel(const CVec& psi) {
    if (psi.size() != 5) throw SizeError("expected a vector of S_4 (length 5)");
    Poly p(5);
    for (int m = 0; m < 5; ++m) p[m] = std::sqrt(binomial(4, m)) * psi(m);
    std::vector<Alpha> out;
    for (cplx b : poly::roots(p)) {
        cplx a = std::conj(b);
        if (overlap(psi, Alpha::at(a), 0) <= 1e-9) push_unique(out, Alpha::at(a));
    }
    if (std::abs(psi(4)) <= 1e-12 * psi.norm()) push_unique(out, Alpha::infinity());
    return out;
}

std::vector<Alpha> solve_case_579(const CVec& psi) {
    if (psi.size() != 8) throw SizeError("expected a vector of C^2 (x) S_3 (length 8)");
    Poly A(4), B(4);
    for (int j = 0; j < 4; ++j) {
        A[j] = kS3[j] * psi(j);
        B[j] = kS3[j] * psi(4 + j);
    }
    const double pn = psi.norm();
    // <e* e e e|psi> = A(conj a) + a B(conj a)
    auto eq = [&](cplx a) { return std::vector<cplx>{poly::eval(A, std::conj(a)) + a * poly::eval(B, std::conj(a))}; };
    std::vector<Alpha> raw;
    double bmax = 0, amax = 0;
    for (int j = 0; j < 4; ++j) {
        bmax = std::max(bmax, std::abs(B[j]));
        amax = std::max(amax, std::abs(A[j]));
    }
    if (bmax <= 1e-14 * pn) {
        for (cplx r : poly::roots(A)) raw.push_back(Alpha::at(std::conj(r)));
    } else if (amax <= 1e-14 * pn) {
        raw.push_back(Alpha::at(0.0));
        for (cplx r : poly::roots(B)) raw.push_back(Alpha::at(std::conj(r)));
    } else {
        // beta stands for conj(alpha); alpha = -A(beta)/B(beta) substituted
        // into the conjugate equation, cleared of denominators.
        Poly Ac(4), Bc(4);
        for (int j = 0; j < 4; ++j) {
            Ac[j] = std::conj(A[j]);
            Bc[j] = std::conj(B[j]);
        }
        Poly total{0.0};
        Poly minusA = poly::scale(A, -1.0);
        for (int j = 0; j < 4; ++j) {
            Poly term = poly::mul(poly::pow(minusA, j), poly::pow(B, 3 - j));
            total = poly::add(total, poly::scale(term, Ac[j]));
            total = poly::add(total, poly::scale(poly::mul(Poly{0.0, 1.0}, term), Bc[j]));
        }
        for (cplx beta : poly::roots(total)) {
            cplx bv = poly::eval(B, beta);
            if (std::abs(bv) <= 1e-300) continue;
            cplx a = -poly::eval(A, beta) / bv;
            if (std::abs(std::conj(a) - beta) > 1e-6 * scale_of(a)) continue;
            raw.push_back(Alpha::at(a));
        }
    }
    std::vector<Alpha> out;
    for (const Alpha& a : raw) {
        cplx p = polish(a.value, eq);
        if (overlap(psi, Alpha::at(p), 1) <= 1e-10) push_unique(out, Alpha::at(p));
    }
    if (std::abs(psi(7)) <= 1e-12 * pn) push_unique(out, Alpha::infinity());
    return out;
}

std::vector<Alpha> solve_case_588(const CVec& psi, const SolverOptions& opt) {
    CMat t = hermitian_kernel_matrix(psi, 1e-8);
    const double tn = t.norm();
    // f(alpha) = u(alpha)^T T u(conj alpha), real, u(z) = (1, sqrt2 z, z^2)
    auto f = [&](cplx a) {
        cplx s = 0;
        cplx ua[3] = {1.0, kS2[1] * a, a * a};
        cplx ub[3] = {1.0, kS2[1] * std::conj(a), std::conj(a) * std::conj(a)};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += ua[i] * t(i, j) * ub[j];
        return s.real();
    };
    auto rel = [&](cplx a) {
        double n = 1 + 2 * std::norm(a) + std::norm(a * a);
        return std::abs(f(a)) / (n * tn);
    };
    std::vector<Alpha> out;
    for (double c : opt.slice_re) {
        // alpha = c + i t' gives a real quartic in t'
        Poly ua[3] = {{1.0}, {kS2[1] * c, kS2[1] * cplx(0, 1)}, {c * c, cplx(0, 2 * c), -1.0}};
        Poly ub[3] = {{1.0}, {kS2[1] * c, -kS2[1] * cplx(0, 1)}, {c * c, cplx(0, -2 * c), -1.0}};
        Poly total{0.0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) total = poly::add(total, poly::scale(poly::mul(ua[i], ub[j]), t(i, j)));
        for (cplx r : poly::roots(total)) {
            if (std::abs(r.imag()) > 1e-6 * scale_of(r)) continue;
            double y = r.real();
            for (int it = 0; it < 6; ++it) {
                double h = 1e-7 * std::max(1.0, std::abs(y));
                double d = (f(cplx(c, y + h)) - f(cplx(c, y - h))) / (2 * h);
                if (d == 0) break;
                double ny = y - f(cplx(c, y)) / d;
                if (std::abs(f(cplx(c, ny))) >= std::abs(f(cplx(c, y)))) break;
                y = ny;
            }
            cplx a(c, y);
            if (rel(a) <= 1e-11) push_unique(out, Alpha::at(a));
        }
    }
    if (std::abs(t(2, 2)) <= 1e-12 * tn) push_unique(out, Alpha::infinity());
    if (!out.empty()) return out;

    // f takes both signs (otherwise T would be a positive or negative
    // definite witness), so bisect between sampled points of opposite sign.
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<cplx> pts{0.0};
    for (int i = 0; i < 2000; ++i)
        pts.push_back(std::polar(std::pow(10.0, -2.0 + 4.0 * u01(rng)), 2 * std::numbers::pi * u01(rng)));
    cplx p = 0, q = 0;
    bool have_p = false, have_q = false;
    for (cplx z : pts) {
        double v = f(z);
        if (v > 0 && !have_p) p = z, have_p = true;
        if (v < 0 && !have_q) q = z, have_q = true;
        if (have_p && have_q) break;
    }
    if (!(have_p && have_q)) return out;
    double lo = 0, hi = 1;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(p + mid * (q - p)) > 0)
            lo = mid;
        else
            hi = mid;
    }
    push_unique(out, Alpha::at(p + 0.5 * (lo + hi) * (q - p)));
    return out;
}

std::vector<Alpha> solve_case_587(const CVec& psi1, const CVec& psi2) {
    CMat t1 = kernel_matrix(psi1), t2 = kernel_matrix(psi2);
    // Real combinations of the kernel plane whose matrix is Hermitian.
    RMat c(18, 4);
    CMat gens[4] = {t1, cplx(0, 1) * t1, t2, cplx(0, 1) * t2};
    for (int j = 0; j < 4; ++j) {
        CMat d = gens[j] - gens[j].adjoint();
        for (int a = 0; a < 9; ++a) {
            c(2 * a, j) = d.data()[a].real();
            c(2 * a + 1, j) = d.data()[a].imag();
        }
    }
    RMat null = real_null_space(c, 1e-8);
    if (null.cols() != 2) throw NumericError("kernel pair has no swap-symmetric real basis");
    CMat h[2];
    for (int i = 0; i < 2; ++i) {
        h[i] = CMat::Zero(3, 3);
        for (int j = 0; j < 4; ++j) h[i] += null(j, i) * gens[j];
        h[i] = hermitian_part(h[i]);
        h[i] /= h[i].norm();
    }
    // g_i(alpha, beta) = sum_j coef_ij(alpha) beta^j, beta for conj(alpha).
    Poly coef[2][3];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            coef[i][j] = Poly(3, 0.0);
            for (int a = 0; a < 3; ++a) coef[i][j][a] = kS2[a] * kS2[j] * h[i](a, j);
        }
    auto sub = [](const Poly& x, const Poly& y) { return poly::add(x, poly::scale(y, -1.0)); };
    Poly ac = sub(poly::mul(coef[0][0], coef[1][2]), poly::mul(coef[1][0], coef[0][2]));
    Poly ab = sub(poly::mul(coef[0][0], coef[1][1]), poly::mul(coef[1][0], coef[0][1]));
    Poly bc = sub(poly::mul(coef[0][1], coef[1][2]), poly::mul(coef[1][1], coef[0][2]));
    Poly res = sub(poly::mul(ac, ac), poly::mul(ab, bc));
    double rmax = 0;
    for (cplx x : res) rmax = std::max(rmax, std::abs(x));
    if (poly::degree(poly::trim(res, 1e-12)) < 1 || rmax < 1e-12)
        throw NumericError("degenerate resultant for the kernel pair");

    auto g = [&](cplx a) {
        std::vector<cplx> e;
        cplx ua[3] = {1.0, kS2[1] * a, a * a};
        cplx ub[3] = {1.0, kS2[1] * std::conj(a), std::conj(a) * std::conj(a)};
        for (int i = 0; i < 2; ++i) {
            cplx s = 0;
            for (int x = 0; x < 3; ++x)
                for (int y = 0; y < 3; ++y) s += ua[x] * h[i](x, y) * ub[y];
            e.push_back(s.real());
        }
        return e;
    };
    auto rel = [&](cplx a) {
        double n = 1 + 2 * std::norm(a) + std::norm(a * a);
        double m = 0;
        for (cplx v : g(a)) m = std::max(m, std::abs(v));
        return m / n;
    };
    std::vector<Alpha> out;
    for (cplx a : poly::roots(res)) {
        cplx den = poly::eval(bc, a);
        cplx beta;
        if (std::abs(den) > 1e-10 * std::pow(scale_of(a), 4)) {
            beta = -poly::eval(ac, a) / den;
        } else {
            Poly q{poly::eval(coef[0][0], a), poly::eval(coef[0][1], a), poly::eval(coef[0][2], a)};
            auto rs = poly::roots(q);
            if (rs.empty()) continue;
            beta = rs[0];
            for (cplx r : rs)
                if (std::abs(r - std::conj(a)) < std::abs(beta - std::conj(a))) beta = r;
        }
        if (std::abs(beta - std::conj(a)) > 1e-6 * scale_of(a)) continue;
        cplx p = polish(a, g);
        if (rel(p) <= 1e-11) push_unique(out, Alpha::at(p));
    }
    if (std::abs(h[0](2, 2)) <= 1e-12 && std::abs(h[1](2, 2)) <= 1e-12) push_unique(out, Alpha::infinity());
    return out;
}

std::vector<double> product_range_residuals(const std::vector<RankProfile>& profiles, const Alpha& a) {
    std::vector<double> r;
    for (size_t k = 0; k < profiles.size(); ++k)
        r.push_back(range_residual(profiles[k], conjugated_product_dicke(a, static_cast<int>(k), 4)));
    return r;
}

EdgeTestReport edge_test(const SymmetricState& s, const Tolerances& tol, const SolverOptions& opt) {
    if (s.num_qubits() != 4) throw SizeError("edge_test requires four qubits");
    if (!is_ppt(s, tol)) throw PreconditionError("edge_test requires a PPT state");
    auto prof = pt_rank_profiles(s, tol);
    EdgeTestReport rep;
    rep.case_tag = std::to_string(prof[0].rank) + "," + std::to_string(prof[1].rank) + "," + std::to_string(prof[2].rank);
    const int k0 = prof[0].kernel_dim(), k1 = prof[1].kernel_dim(), k2 = prof[2].kernel_dim();
    std::vector<Alpha> cands;
    try {
        if (k0 >= 1) {
            rep.solver = "rho-kernel";
            cands = solve_rho_kernel(prof[0].kernel_basis.col(0));
        } else if (k1 >= 1) {
            rep.solver = "case-579";
            cands = solve_case_579(prof[1].kernel_basis.col(0));
        } else if (k2 >= 2) {
            rep.solver = "case-587";
            cands = solve_case_587(prof[2].kernel_basis.col(0), prof[2].kernel_basis.col(1));
        } else if (k2 == 1) {
            rep.solver = "case-588";
            cands = solve_case_588(prof[2].kernel_basis.col(0), opt);
        } else {
            rep.solver = "full-rank";
            rep.case_tag = "full-rank";
            cands = {Alpha::at(0.0)};
        }
    } catch (const Error& e) {
        rep.inconclusive = true;
        rep.note = e.what();
        if (rep.solver.empty()) rep.case_tag = "dispatch-failed";
        return rep;
    }
    rep.candidates = static_cast<int>(cands.size());
    for (const Alpha& a : cands) {
        auto r = product_range_residuals(prof, a);
        if (*std::max_element(r.begin(), r.end()) <= tol.residual_tol) rep.found_vectors.push_back({a, r});
    }
    rep.is_edge_counterexample = !rep.found_vectors.empty();
    if (!rep.is_edge_counterexample) rep.note = "no vector found";
    return rep;
}

}  // namespace pptsym
