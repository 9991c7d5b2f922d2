#include "pptsym/horodecki.hpp"

#include "pptsym/errors.hpp"
#include "pptsym/nls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pptsym {

double HorodeckiParams::y() const { return std::sqrt((1.0 - b) / (1.0 + b)); }

void HorodeckiParams::validate() const {
    if (d < 2 || d > 16) throw PreconditionError("d must be in [2, 16], got " + std::to_string(d));
    if (!(b >= 0.0 && b <= 1.0)) throw PreconditionError("b must be in [0, 1]");
}

namespace {
inline Eigen::Index idx(int a, int i, int d) { return Eigen::Index(a) * d + i; }

CVec ket(int a, int i, int d) {
    CVec v = CVec::Zero(2 * d);
    v(idx(a, i, d)) = 1.0;
    return v;
}
}  // namespace

QubitQuditState rho_insep(int d) {
    if (d < 2) throw PreconditionError("rho_insep requires d >= 2");
    CMat m = CMat::Zero(2 * d, 2 * d);
    const double w = 2.0 / (2 * d - 1);
    for (int i = 0; i + 1 < d; ++i) {
        CVec psi = (ket(0, i, d) + ket(1, i + 1, d)) / std::sqrt(2.0);
        m += w * psi * psi.adjoint();
    }
    CVec k10 = ket(1, 0, d);
    m += (1.0 / (2 * d - 1)) * k10 * k10.adjoint();
    return {d, m, true};
}

QubitQuditState rho_db(const HorodeckiParams& p) {
    p.validate();
    const int d = p.d;
    CVec phi = (std::sqrt(1 - p.b) * ket(0, 0, d) + std::sqrt(1 + p.b) * ket(0, d - 1, d)) / std::sqrt(2.0);
    const double s = (2 * d - 1) * p.b;
    CMat m = (s * rho_insep(d).matrix + phi * phi.adjoint()) / (s + 1.0);
    return {d, m, true};
}

CMat rho_db_blocks(const HorodeckiParams& p) {
    p.validate();
    const int d = p.d;
    const double b = p.b;
    RMat c = RMat::Identity(d, d) * b;
    c(0, 0) = c(d - 1, d - 1) = (1 + b) / 2;
    c(0, d - 1) = c(d - 1, 0) = std::sqrt(1 - b * b) / 2;
    RMat bu = RMat::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) bu(i, i + 1) = 1.0;
    RMat m(2 * d, 2 * d);
    m << c, b * bu, b * bu.transpose(), b * RMat::Identity(d, d);
    return m.cast<cplx>() / ((2 * d - 1) * b + 1);
}

CMat qubit_partial_transpose(const CMat& m, int d) {
    CMat out = m;
    out.block(0, d, d, d) = m.block(d, 0, d, d);
    out.block(d, 0, d, d) = m.block(0, d, d, d);
    return out;
}

double verify_ppt_by_unitary(const HorodeckiParams& p) {
    CMat rho = rho_db(p).matrix;
    const int d = p.d;
    CMat u = CMat::Zero(d, d);
    for (int i = 0; i < d; ++i) u(i, d - 1 - i) = 1.0;
    CMat big = CMat::Zero(2 * d, 2 * d);
    big.block(0, 0, d, d) = u;
    big.block(d, d, d, d) = u;
    return (qubit_partial_transpose(rho, d) - big * rho * big.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<cplx> range_conditions(const HorodeckiParams& p, cplx alpha) {
    const int d = p.d;
    const double y = p.y();
    std::vector<cplx> f(d);
    for (int m = 0; m < d; ++m) f[m] = ipow(alpha, d - 1 - m);
    f[0] += y;
    const cplx ac = std::conj(alpha);
    std::vector<cplx> r;
    for (int m = 1; m + 1 < d; ++m) r.push_back(f[m] - ac * f[m - 1]);
    r.push_back(f[d - 1] - y * f[0] - ac * f[d - 2]);
    return r;
}

CVec range_product_vector(const HorodeckiParams& p, const Alpha& a, bool conjugate_qubit) {
    const int d = p.d;
    CVec q(2), f(d);
    if (a.infinite) {
        q << 0.0, 1.0;
        f.setZero();
        f(0) = 1.0;
    } else {
        q << 1.0, conjugate_qubit ? std::conj(a.value) : a.value;
        for (int m = 0; m < d; ++m) f(m) = ipow(a.value, d - 1 - m);
        f(0) += p.y();
    }
    CVec v(2 * d);
    v.head(d) = q(0) * f;
    v.tail(d) = q(1) * f;
    return v;
}

namespace {
double scaled_max_residual(const std::vector<cplx>& r, cplx alpha, int d) {
    double m = 0;
    for (cplx c : r) m = std::max(m, std::abs(c));
    return m / std::max(1.0, std::pow(std::abs(alpha), d - 1));
}

ConditionEval evaluate(const HorodeckiParams& p, const RankProfile& pta, const std::string& branch,
                       const Alpha& a, double tol) {
    ConditionEval e;
    e.branch = branch;
    e.alpha = a;
    e.range_residual = range_residual(pta, range_product_vector(p, a, true));
    if (a.infinite) {
        e.residuals = {e.range_residual};
        e.passes = e.range_residual <= tol;
        return e;
    }
    auto r = range_conditions(p, a.value);
    for (cplx c : r) e.residuals.push_back(std::abs(c));
    e.passes = scaled_max_residual(r, a.value, p.d) <= tol;
    return e;
}

// Golden-section refinement of a 1-D function on [lo, hi].
template <class F>
double golden_min(F f, double lo, double hi, int iters = 80) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return (lo + hi) / 2;
}
}  // namespace

RangeCriterionReport range_criterion_test(const HorodeckiParams& p, const RangeSearchConfig& cfg) {
    p.validate();
    if (!(p.b > 0.0 && p.b < 1.0))
        throw BoundaryError("range criterion applies to 0 < b < 1; use the separable forms at b = 0, 1");
    const int d = p.d;
    const double tol = cfg.tol.residual_tol;
    RankProfile pta = rank_profile(qubit_partial_transpose(rho_db(p).matrix, d), cfg.tol);
    RangeCriterionReport rep;

    if (d >= 4) {
        // Condition (i) leaves alpha = 0, |alpha| = 1 and the point at infinity.
        rep.tested_conditions.push_back(evaluate(p, pta, "alpha=0", Alpha::at(0.0), tol));
        auto cond_ii = [&](double th) {
            cplx a = std::polar(1.0, th);
            return std::abs(ipow(a, d - 2) - std::conj(a) * (ipow(a, d - 1) + p.y()));
        };
        const int n = cfg.theta_grid;
        const double h = 2 * std::numbers::pi / n;
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = cond_ii(i * h);
        // On the unit circle (ii) reduces to |y alpha*| = y, so the grid is
        // often flat; strict minima are refined, else the global minimum.
        std::vector<int> minima;
        auto [gmin, gmax] = std::minmax_element(g.begin(), g.end());
        const bool flat = *gmax - *gmin <= 1e-10 * std::max(1.0, *gmax);
        for (int i = 0; i < n && !flat; ++i) {
            double gl = g[(i + n - 1) % n], gr = g[(i + 1) % n];
            if (g[i] < gl && g[i] <= gr) minima.push_back(i);
        }
        if (minima.empty()) minima.push_back(static_cast<int>(std::min_element(g.begin(), g.end()) - g.begin()));
        for (int i : minima) {
            double th = golden_min(cond_ii, (i - 1) * h, (i + 1) * h);
            rep.tested_conditions.push_back(evaluate(p, pta, "|alpha|=1", Alpha::at(std::polar(1.0, th)), tol));
        }
        rep.tested_conditions.push_back(evaluate(p, pta, "infinity", Alpha::infinity(), tol));
    } else {
        // No finite candidate set: search the plane for a solution.
        auto objective = [&](cplx a) { return scaled_max_residual(range_conditions(p, a), a, d); };
        std::vector<std::pair<double, cplx>> seeds;
        const int nt = std::max(8, cfg.theta_grid / 8);
        for (int ir = 0; ir < cfg.radial_grid; ++ir) {
            double r = std::pow(10.0, -3.0 + 6.0 * ir / (cfg.radial_grid - 1));
            for (int it = 0; it < nt; ++it) {
                cplx a = std::polar(r, 2 * std::numbers::pi * it / nt);
                seeds.push_back({objective(a), a});
            }
        }
        std::partial_sort(seeds.begin(), seeds.begin() + 12, seeds.end(),
                          [](auto& x, auto& y) { return x.first < y.first; });
        const int m = 2 * static_cast<int>(range_conditions(p, 0.0).size());
        for (int s = 0; s < 12; ++s) {
            ResidualFn f = [&](const RVec& x, RVec& r) {
                auto c = range_conditions(p, cplx(x(0), x(1)));
                for (size_t i = 0; i < c.size(); ++i) {
                    r(2 * i) = c[i].real();
                    r(2 * i + 1) = c[i].imag();
                }
            };
            RVec x0(2);
            x0 << seeds[s].second.real(), seeds[s].second.imag();
            LsqResult res = least_squares(f, m, x0);
            ConditionEval e = evaluate(p, pta, "search", Alpha::at(cplx(res.x(0), res.x(1))), tol);
            rep.tested_conditions.push_back(e);
            if (e.passes) break;
        }
        rep.tested_conditions.push_back(evaluate(p, pta, "infinity", Alpha::infinity(), tol));
    }
    for (const auto& e : rep.tested_conditions)
        if (e.passes && !rep.witness) rep.witness = e.alpha;
    rep.entangled = !rep.witness.has_value();
    return rep;
}

std::vector<CVec> kernel_basis(const HorodeckiParams& p) {
    p.validate();
    if (!(p.b > 0.0 && p.b < 1.0)) throw BoundaryError("kernel_basis requires 0 < b < 1");
    const int d = p.d;
    std::vector<CVec> out;
    for (int i = 1; i + 1 < d; ++i) out.push_back(ket(0, i, d) - ket(1, i + 1, d));
    out.push_back(-std::sqrt(1 + p.b) * ket(0, 0, d) + std::sqrt(1 - p.b) * ket(0, d - 1, d) +
                  std::sqrt(1 + p.b) * ket(1, 1, d));
    return out;
}

CMat SeparableMixture::reconstruct() const {
    if (terms.empty()) return CMat();
    const Eigen::Index n = terms[0].qubit.size() * terms[0].qudit.size();
    CMat m = CMat::Zero(n, n);
    for (const auto& t : terms) {
        CVec v(n);
        for (Eigen::Index a = 0; a < t.qubit.size(); ++a) v.segment(a * t.qudit.size(), t.qudit.size()) = t.qubit(a) * t.qudit;
        m += t.weight * v * v.adjoint();
    }
    return m;
}

SeparableMixture separable_decomposition_b1(int d, int nodes) {
    HorodeckiParams p{d, 1.0};
    p.validate();
    if (nodes < 2 * d + 1)
        throw PreconditionError("separable_decomposition_b1 needs at least 2d+1 nodes");
    SeparableMixture mix;
    for (int j = 0; j < nodes; ++j) {
        double phi = 2 * std::numbers::pi * j / nodes;
        ProductTerm t;
        t.weight = 1.0 / nodes;
        t.qubit = CVec(2);
        t.qubit << 1.0, std::polar(1.0, phi);
        t.qubit /= std::sqrt(2.0);
        t.qudit = CVec(d);
        for (int k = 0; k < d; ++k) t.qudit(k) = std::polar(1.0 / std::sqrt(double(d)), -k * phi);
        mix.terms.push_back(t);
    }
    mix.frobenius_error = (mix.reconstruct() - rho_db(p).matrix).norm();
    mix.fitted_prefactor = 1.0 / (2 * std::numbers::pi);
    mix.paper_constant_ratio = mix.fitted_prefactor * 16 * std::numbers::pi;
    return mix;
}

HorodeckiClassification classify_horodecki(const HorodeckiParams& p, const RangeSearchConfig& cfg) {
    p.validate();
    if (p.b == 0.0) return {HorodeckiVerdict::Separable, "b = 0: pure product state"};
    if (p.b == 1.0) {
        auto mix = separable_decomposition_b1(p.d, 2 * p.d + 1);
        if (mix.frobenius_error <= 1e-10)
            return {HorodeckiVerdict::Separable, "b = 1: explicit product mixture"};
        throw NumericError("b = 1 decomposition failed to reconstruct the state");
    }
    auto rep = range_criterion_test(p, cfg);
    if (rep.entangled) return {HorodeckiVerdict::Entangled, "range criterion violated"};
    return {HorodeckiVerdict::Separable, "range criterion satisfied and PPT in 2x2 / 2x3"};
}

}  // namespace pptsym
