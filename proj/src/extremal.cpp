#include "pptsym/extremal.hpp"

#include "pptsym/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace pptsym {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

RVec herm_to_coords(const CMat& h) {
    const int n = static_cast<int>(h.rows());
    RVec c(n * n);
    int k = 0;
    for (int i = 0; i < n; ++i) c(k++) = h(i, i).real();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            cplx v = (h(i, j) + std::conj(h(j, i))) * 0.5;
            c(k++) = std::sqrt(2.0) * v.real();
            c(k++) = -std::sqrt(2.0) * v.imag();
        }
    return c;
}

CMat coords_to_herm(const RVec& c, int n) {
    if (c.size() != n * n) throw SizeError("coords_to_herm: length mismatch");
    CMat h = CMat::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i) h(i, i) = c(k++);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = c(k++), a = c(k++);
            h(i, j) = cplx(s * kInvSqrt2, -a * kInvSqrt2);
            h(j, i) = std::conj(h(i, j));
        }
    return h;
}

std::vector<int> pt_ranks(const SymmetricState& s, const Tolerances& tol) {
    std::vector<int> r;
    for (const auto& p : pt_rank_profiles(s, tol)) r.push_back(p.rank);
    return r;
}

FixedPointSystem build_fixed_point_system(const SymmetricState& s, const Tolerances& tol) {
    if (!is_ppt(s, tol)) throw PreconditionError("fixed-point system requires a PPT state");
    const int n = s.num_qubits();
    const int dim = n + 1;
    const int nc = dim * dim;
    FixedPointSystem sys;
    sys.num_qubits = n;
    sys.state_coords = herm_to_coords(s.matrix());
    std::vector<CMat> basis;
    for (int j = 0; j < nc; ++j) {
        RVec e = RVec::Zero(nc);
        e(j) = 1.0;
        basis.push_back(coords_to_herm(e, dim));
    }
    for (int k = 0; k <= n / 2; ++k) {
        RankProfile p = rank_profile(compressed_pt(s, k), tol);
        sys.ranks.push_back(p.rank);
        const Eigen::Index m = p.range_projector.rows();
        CMat q = CMat::Identity(m, m) - p.range_projector;
        RMat c(2 * m * m, nc);
        for (int j = 0; j < nc; ++j) {
            CMat y = q * compressed_pt(basis[j], n, k);
            for (Eigen::Index a = 0; a < m * m; ++a) {
                c(2 * a, j) = y.data()[a].real();
                c(2 * a + 1, j) = y.data()[a].imag();
            }
        }
        // Eigenvalues under the rank cut still leave Q rho^{T_k} of that size,
        // so the null cut has to admit the state itself.
        const double rank_cut = p.tolerance_used * (m > 0 ? p.singular_values(0) : 0.0);
        double dropped = 0;
        for (Eigen::Index i = 0; i < p.eigenvalues.size(); ++i)
            if (std::abs(p.eigenvalues(i)) <= rank_cut) dropped = std::max(dropped, std::abs(p.eigenvalues(i)));
        double xn = std::max(1e-300, sys.state_coords.norm());
        double cut = std::max(1e-10, 4.0 * std::sqrt(double(m)) * dropped / xn);
        RMat null = real_null_space(c, cut);
        sys.maps.push_back(null * null.transpose());
    }
    sys.composed = RMat::Identity(nc, nc);
    for (const RMat& p : sys.maps) sys.composed = p * sys.composed;
    return sys;
}

SolutionSpace solution_space(const FixedPointSystem& sys, double zero_tol) {
    const Eigen::Index nc = sys.composed.rows();
    const int dim = static_cast<int>(std::lround(std::sqrt(double(nc))));
    SolutionSpace out;
    RMat a = sys.composed - RMat::Identity(nc, nc);
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
    const RVec& sv = svd.singularValues();
    std::vector<RVec> kept;
    for (Eigen::Index i = 0; i < nc; ++i) {
        if (sv(i) > zero_tol) continue;
        RVec v = svd.matrixV().col(i);
        double res = 0;
        for (const RMat& p : sys.maps) res = std::max(res, (p * v - v).norm());
        if (res <= zero_tol) {
            kept.push_back(v);
            out.max_equation_residual = std::max(out.max_equation_residual, res);
        }
    }
    out.dimension = static_cast<int>(kept.size());
    out.coords.resize(nc, kept.size());
    for (size_t j = 0; j < kept.size(); ++j) {
        out.coords.col(j) = kept[j];
        out.basis.push_back(coords_to_herm(kept[j], dim));
    }
    RMat stacked(nc * sys.maps.size(), nc);
    for (size_t k = 0; k < sys.maps.size(); ++k)
        stacked.middleRows(k * nc, nc) = sys.maps[k] - RMat::Identity(nc, nc);
    Eigen::JacobiSVD<RMat> s2(stacked);
    int zeros = 0;
    for (Eigen::Index i = 0; i < s2.singularValues().size(); ++i)
        if (s2.singularValues()(i) <= zero_tol) ++zeros;
    out.intersection_dimension = zeros;
    out.consistent = zeros == out.dimension;
    return out;
}

ExtremalityReport extremality_test(const SymmetricState& s, const Tolerances& tol) {
    FixedPointSystem sys = build_fixed_point_system(s, tol);
    SolutionSpace sp = solution_space(sys);
    ExtremalityReport rep;
    rep.solution_dim = sp.dimension;
    rep.is_extremal = sp.dimension == 1;
    rep.pt_ranks = sys.ranks;
    rep.rank = sys.ranks[0];
    rep.basis_of_solutions = sp.basis;
    rep.max_equation_residual = sp.max_equation_residual;
    rep.consistent = sp.consistent;
    rep.entangled_by_extremality = rep.is_extremal && rep.rank >= 2;
    if (s.num_qubits() == 4)
        rep.counting_bound_triggered = counting_bound(sys.ranks, CountingSpace::Symmetric4).not_extremal;
    return rep;
}

CountingBound counting_bound(const std::vector<int>& ranks, CountingSpace space, int num_qubits,
                             int local_dim) {
    CountingBound cb;
    for (int r : ranks) {
        if (r < 0) throw PreconditionError("counting_bound: negative rank");
        cb.lhs += long(r) * r;
    }
    if (space == CountingSpace::Symmetric4) {
        if (ranks.size() != 3) throw PreconditionError("symmetric4 bound needs three ranks");
        // Fixed-point equations on 25 real coordinates: r^2 + r_A^2 + r_AB^2 - 145
        // independent solutions at least, so a second one needs >= 147.
        cb.threshold = 147;
        cb.note = "symmetric four-qubit threshold 25+64+81-25+2";
    } else {
        const long m = static_cast<long>(ranks.size()) - 1;
        long dn = 1;
        for (int i = 0; i < 2 * num_qubits; ++i) dn *= local_dim;
        cb.threshold = m * dn + 1;
        cb.note = "general-space threshold M d^{2N} + 1; naive counting gives +2";
    }
    cb.not_extremal = cb.lhs >= cb.threshold;
    return cb;
}

SymmetricState step_state(const SymmetricState& s, const CMat& h, double x) {
    double trh = h.trace().real();
    return SymmetricState(s.num_qubits(), (1.0 - x * trh) * s.matrix() + x * h);
}

namespace {
struct Pencil {
    CMat ar, br;
};

// Range-restricted pencil for rho^{T_k} + x (h - Tr h rho)^{T_k}.
Pencil make_pencil(const SymmetricState& s, const CMat& h, int k, const Tolerances& tol) {
    const int n = s.num_qubits();
    CMat a = compressed_pt(s.matrix(), n, k);
    CMat b = compressed_pt(h - h.trace().real() * s.matrix(), n, k);
    RankProfile p = rank_profile(a, tol);
    return {p.range_basis.adjoint() * a * p.range_basis, p.range_basis.adjoint() * b * p.range_basis};
}

double pencil_min_eig(const Pencil& p, double x) {
    if (p.ar.rows() == 0) return 0.0;
    return min_eigenvalue(p.ar + x * p.br);
}

// Largest t in [0, x] (same sign as x) keeping the pencil PSD.
double polish(const Pencil& p, double x) {
    double scale = std::max(1e-300, p.ar.cwiseAbs().maxCoeff());
    double lo = 0.999 * x, hi = 1.001 * x;
    if (pencil_min_eig(p, lo) < 0) lo = 0.0;
    if (pencil_min_eig(p, hi) >= 0) return x;
    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12 * std::max(1.0, std::abs(x)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (pencil_min_eig(p, mid) >= -1e-16 * scale)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}
}  // namespace

std::pair<CriticalPoint, CriticalPoint> critical_points(const SymmetricState& s, const CMat& h,
                                                        const Tolerances& tol) {
    CriticalPoint pos, neg;
    for (int k = 0; k <= s.num_qubits() / 2; ++k) {
        Pencil p = make_pencil(s, h, k, tol);
        if (p.ar.rows() == 0) continue;
        Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(hermitian_part(p.br), hermitian_part(p.ar),
                                                          Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
        const RVec& mu = ges.eigenvalues();
        double mumin = mu.minCoeff(), mumax = mu.maxCoeff();
        const double eps = 1e-14;
        if (mumin < -eps) {
            double x = -1.0 / mumin;
            if (!pos.finite || x < pos.x) pos = {x, k, true};
        }
        if (mumax > eps) {
            double x = -1.0 / mumax;
            if (!neg.finite || x > neg.x) neg = {x, k, true};
        }
    }
    for (CriticalPoint* c : {&pos, &neg}) {
        if (!c->finite) continue;
        Pencil p = make_pencil(s, h, c->limiting_k, tol);
        c->x = polish(p, c->x);
    }
    return {pos, neg};
}

StepResult rank_reduction_step(const SymmetricState& s, const CMat& h, const Tolerances& tol) {
    const int dim = s.num_qubits() + 1;
    if (h.rows() != dim || h.cols() != dim) throw SizeError("direction has wrong dimension");
    RVec hc = herm_to_coords(h);
    if (std::abs(hc.norm() - 1.0) > 1e-8) throw PreconditionError("direction must have unit HS norm");
    if (std::abs(hc.dot(herm_to_coords(s.matrix()))) > 1e-8)
        throw PreconditionError("direction must be HS-orthogonal to the state");
    FixedPointSystem sys = build_fixed_point_system(s, tol);
    for (const RMat& p : sys.maps)
        if ((p * hc - hc).norm() > 1e-8) throw PreconditionError("direction does not solve the fixed-point system");

    auto [pos, neg] = critical_points(s, h, tol);
    CriticalPoint c;
    if (pos.finite && (!neg.finite || pos.x <= -neg.x))
        c = pos;
    else if (neg.finite)
        c = neg;
    else
        throw NumericError("no finite critical step for this direction");

    StepResult out;
    out.critical = c;
    out.ranks_before = sys.ranks;
    out.state = step_state(s, h, c.x);
    out.ranks_after = pt_ranks(out.state, tol);
    auto sum = [](const std::vector<int>& v) { int t = 0; for (int x : v) t += x; return t; };
    if (sum(out.ranks_after) >= sum(out.ranks_before)) {
        // Bisection stops just short of the singular point; recount once with a looser cut.
        Tolerances t2 = tol;
        t2.rank_rel_tol = std::min(0.5, tol.rank_rel_tol * 100);
        out.ranks_after = pt_ranks(out.state, t2);
        if (sum(out.ranks_after) >= sum(out.ranks_before))
            throw NumericError("critical step did not reduce any rank");
    }
    return out;
}

WalkTrace extremal_search(std::uint64_t seed, const SearchConfig& cfg) {
    WalkTrace tr;
    tr.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SymmetricState cur = cfg.start.normalized();
    const int dim = cur.num_qubits() + 1;
    // Each step leaves residue around the rank cut in the dropped eigenvalues;
    // the walk reads those as zero, so PSD is checked on the same scale.
    Tolerances tol = cfg.tol;
    tol.psd_tol = std::max(tol.psd_tol, tol.rank_rel_tol);
    auto sum = [](const std::vector<int>& v) { int t = 0; for (int x : v) t += x; return t; };
    auto above_floor = [&](const std::vector<int>& r) {
        if (cfg.rank_floor.size() != r.size()) return true;
        for (size_t i = 0; i < r.size(); ++i)
            if (r[i] < cfg.rank_floor[i]) return false;
        return true;
    };

    for (int step = 0; step <= cfg.max_steps; ++step) {
        FixedPointSystem sys = build_fixed_point_system(cur, tol);
        SolutionSpace sp = solution_space(sys);
        if (sp.dimension == 0) {
            tr.terminal = cur;
            tr.terminal_report = extremality_test(cur, tol);
            tr.status = "solution space lost";
            return tr;
        }
        if (sp.dimension == 1) {
            tr.terminal = cur;
            tr.terminal_report = extremality_test(cur, tol);
            tr.completed = true;
            tr.status = "extremal";
            return tr;
        }
        if (step == cfg.max_steps) break;
        // Directions orthogonal to the state inside the solution space.
        RVec c = sys.state_coords.normalized();
        RMat sdir = sp.coords - c * (c.transpose() * sp.coords);
        Eigen::JacobiSVD<RMat> svd(sdir, Eigen::ComputeThinU);
        int r = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-8) ++r;
        RMat basis = svd.matrixU().leftCols(r);
        if (r == 0) break;
        const int ncand = cfg.candidates_per_step > 0 ? cfg.candidates_per_step : 2 * sp.dimension + 4;

        struct Cand {
            RVec dir;
            CriticalPoint cp;
            SymmetricState next;
            std::vector<int> ranks;
        };
        std::vector<Cand> cands;
        for (int t = 0; t < ncand; ++t) {
            RVec g(r);
            for (int i = 0; i < r; ++i) g(i) = normal(rng);
            RVec v = basis * g;
            v.normalize();
            CMat h = coords_to_herm(v, dim);
            auto [pos, neg] = critical_points(cur, h, tol);
            for (const CriticalPoint& cp : {pos, neg}) {
                if (!cp.finite) continue;
                SymmetricState nx = step_state(cur, h, cp.x).normalized();
                std::vector<int> rk = pt_ranks(nx, tol);
                if (sum(rk) < sum(sys.ranks) && is_ppt(nx, tol))
                    cands.push_back({cp.x >= 0 ? v : RVec(-v), cp, nx, rk});
            }
        }
        std::vector<size_t> pool;
        for (size_t i = 0; i < cands.size(); ++i)
            if (above_floor(cands[i].ranks)) pool.push_back(i);
        if (pool.empty())
            for (size_t i = 0; i < cands.size(); ++i) pool.push_back(i);
        if (pool.empty()) {
            tr.status = "no rank-reducing direction found";
            tr.terminal = cur;
            return tr;
        }
        std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
        const Cand& ch = cands[pool[pick(rng)]];
        WalkStep ws;
        ws.ranks_before = sys.ranks;
        ws.ranks_after = ch.ranks;
        ws.x_star = std::abs(ch.cp.x);
        ws.limiting_k = ch.cp.limiting_k;
        ws.direction = ch.dir;
        ws.state = ch.next;
        tr.steps.push_back(ws);
        cur = ch.next;
    }
    tr.terminal = cur;
    tr.status = "max steps exceeded";
    return tr;
}

Fingerprint spectral_fingerprint(const SymmetricState& s) {
    Fingerprint f;
    for (const CMat& x : pt_chain(s)) {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
        std::vector<double> ev;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            double v = std::round(es.eigenvalues()(i) * 1e6) / 1e6;
            ev.push_back(v == 0.0 ? 0.0 : v);
        }
        std::sort(ev.begin(), ev.end());
        f.push_back(ev);
    }
    return f;
}

std::string fingerprint_key(const Fingerprint& f) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    for (const auto& v : f) {
        for (double x : v) os << x << ',';
        os << '|';
    }
    return os.str();
}

}  // namespace pptsym
