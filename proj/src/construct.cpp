#include "pptsym/construct.hpp"

#include "pptsym/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pptsym {

namespace {
CMat make_f(int d, double y) {
    CMat f = CMat::Identity(d, d);
    f(0, d - 1) -= y;
    return f;
}

CMat make_f2(int d, int dprime, const std::vector<cplx>& gammas) {
    if (dprime < 2 || dprime >= d) throw PreconditionError("need 2 <= d' < d");
    if (static_cast<int>(gammas.size()) != d - dprime + 1)
        throw PreconditionError("need d - d' + 1 filter parameters");
    CMat f2 = CMat::Zero(dprime, d);
    for (int i = 0; i < dprime; ++i)
        for (int j = 0; j <= d - dprime; ++j) f2(i, i + j) = gammas[j];
    Eigen::JacobiSVD<CMat> svd(f2);
    if (svd.singularValues()(dprime - 1) <= 1e-12 * svd.singularValues()(0))
        throw PreconditionError("F2 is rank deficient");
    return f2;
}

// |i> -> |E_{n-i}^{n}> with n = d'-1, in orthonormal Dicke coordinates.
CMat make_v(int dprime) {
    if (dprime < 2 || dprime > kMaxQubits) throw SizeError("V filter needs 2 <= d' <= 12");
    const int n = dprime - 1;
    CMat v = CMat::Zero(dprime, dprime);
    for (int i = 0; i < dprime; ++i) v(n - i, i) = std::sqrt(binomial(n, n - i));
    return v;
}

CMat local(const CMat& m) {
    CMat out = CMat::Zero(2 * m.rows(), 2 * m.cols());
    out.topLeftCorner(m.rows(), m.cols()) = m;
    out.bottomRightCorner(m.rows(), m.cols()) = m;
    return out;
}
}  // namespace

FilterChain build_filter_chain(int d, int dprime, double b, const std::vector<cplx>& gammas) {
    HorodeckiParams p{d, b};
    p.validate();
    FilterChain fc;
    fc.d = d;
    fc.dprime = dprime;
    fc.b = b;
    fc.y = p.y();
    fc.gammas = gammas;
    fc.F = make_f(d, fc.y);
    fc.F2 = make_f2(d, dprime, gammas);
    fc.V = make_v(dprime);
    return fc;
}

QubitQuditState apply_filter_F(const QubitQuditState& s, double b) {
    HorodeckiParams p{s.d, b};
    p.validate();
    CMat l = local(make_f(s.d, p.y()));
    return {s.d, l * s.matrix * l.adjoint(), false};
}

QubitQuditState apply_filter_F2(const QubitQuditState& s, int dprime, const std::vector<cplx>& gammas) {
    CMat l = local(make_f2(s.d, dprime, gammas));
    return {dprime, l * s.matrix * l.adjoint(), false};
}

SymmetricState apply_filter_V(const QubitQuditState& s) {
    const int n = s.d;
    CMat l = local(make_v(n));
    CMat x = l * s.matrix * l.adjoint();
    RMat j = split_isometry(n, 1);
    CMat omega = j.transpose().cast<cplx>() * x * j.cast<cplx>();
    CMat back = j.cast<cplx>() * omega * j.transpose().cast<cplx>();
    if ((back - x).norm() > 1e-9 * std::max(1.0, x.norm()))
        throw SupportError("filtered state is not supported on the symmetric subspace");
    return SymmetricState(n, omega);
}

SymmetricState build_omega(const HorodeckiParams& p, int dprime, const std::vector<cplx>& gammas,
                           OmegaScale scale) {
    QubitQuditState r = rho_db(p);
    if (scale == OmegaScale::Unnormalized) r.matrix *= 2.0 * ((2 * p.d - 1) * p.b + 1);
    SymmetricState w = apply_filter_V(apply_filter_F2(apply_filter_F(r, p.b), dprime, gammas));
    return scale == OmegaScale::TraceNormalized ? w.normalized() : w;
}

SymmetricState lift(const SymmetricState& omega, double lambda, ProjectorScale proj) {
    const int n = omega.num_qubits();
    double c = proj == ProjectorScale::Bare ? lambda : lambda / (n + 1);
    return SymmetricState(n, omega.matrix() + c * CMat::Identity(n + 1, n + 1));
}

LambdaResult min_lambda_ppt(const SymmetricState& omega, ProjectorScale proj) {
    auto mineig = [&](double lam) { return min_pt_eigenvalue(lift(omega, lam, proj)); };
    LambdaResult r;
    if (mineig(0.0) >= 0.0) return r;
    double lo = 0.0;
    double hi = 10.0 * std::max(1e-300, Eigen::JacobiSVD<CMat>(omega.matrix()).singularValues()(0));
    for (int i = 0; i < 60 && mineig(hi) < 0; ++i) {
        lo = hi;
        hi *= 2;
    }
    if (mineig(hi) < 0) throw NumericError("lambda bracket could not be established");
    for (r.iterations = 0; r.iterations < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++r.iterations) {
        double mid = 0.5 * (lo + hi);
        if (mineig(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    r.lambda = hi;
    SymmetricState l = lift(omega, hi, proj);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= omega.num_qubits() / 2; ++k) {
        double e = min_eigenvalue(compressed_pt(l, k));
        if (e < best) {
            best = e;
            r.limiting_k = k;
        }
    }
    return r;
}

std::vector<SubtractionCandidate> find_subtraction_vector(const SymmetricState& s, const Tolerances& tol,
                                                          const SolverOptions& opt) {
    EdgeTestReport rep = edge_test(s, tol, opt);
    std::vector<SubtractionCandidate> out;
    if (rep.solver == "full-rank") {
        auto prof = pt_rank_profiles(s, tol);
        for (double c : opt.slice_re) {
            Alpha a = Alpha::at(c);
            out.push_back({a, product_range_residuals(prof, a)});
        }
        return out;
    }
    for (const auto& f : rep.found_vectors) out.push_back({f.alpha, f.range_residuals});
    return out;
}

MuResult max_subtraction_weight(const SymmetricState& s, const Alpha& a, const Tolerances& tol) {
    if (s.num_qubits() != 4) throw SizeError("subtraction weight requires four qubits");
    MuResult r;
    r.mu = std::numeric_limits<double>::infinity();
    auto prof = pt_rank_profiles(s, tol);
    for (int k = 0; k <= 2; ++k) {
        CVec v = conjugated_product_dicke(a, k, 4).normalized();
        if (range_residual(prof[k], v) > tol.residual_tol)
            throw PreconditionError("product vector lies outside the range of a partial transpose");
        double mu = 1.0 / pinv_quadratic_form(prof[k], v);
        r.per_k.push_back(mu);
        if (mu < r.mu) {
            r.mu = mu;
            r.limiting_k = k;
        }
    }
    return r;
}

SymmetricState subtract_product(const SymmetricState& s, const Alpha& a, double mu) {
    CVec v = conjugated_product_dicke(a, 0, 4).normalized();
    return SymmetricState(s.num_qubits(), s.matrix() - mu * v * v.adjoint());
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult res;
    const Tolerances& tol = cfg.tol;
    HorodeckiParams p{cfg.d, cfg.b};
    auto stage = [&](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            throw StageError(name, e.what());
        }
    };
    auto record = [&](const char* name, const SymmetricState& s) {
        res.stages.push_back({name, pt_ranks(s, tol)});
    };

    res.omega = stage("filters", [&] { return build_omega(p, cfg.dprime, cfg.gammas, cfg.omega_scale); });
    record("omega", res.omega);

    stage("lambda", [&] {
        if (cfg.lambda_auto) {
            LambdaResult lr = min_lambda_ppt(res.omega, cfg.projector_scale);
            res.lambda_star = lr.lambda;
            res.lambda_limiting_k = lr.limiting_k;
        } else {
            res.lambda_star = cfg.lambda_value;
        }
        res.lifted = lift(res.omega, res.lambda_star, cfg.projector_scale);
        if (!is_ppt(res.lifted, tol)) {
            std::ostringstream msg;
            msg << "not PPT at lambda=" << res.lambda_star;
            throw PreconditionError(msg.str());
        }
        return 0;
    });
    record("lifted", res.lifted);

    SymmetricState fin = res.lifted;
    if (cfg.subtract && res.omega.num_qubits() == 4) {
        stage("subtract", [&] {
            SolverOptions opt;
            opt.slice_re = cfg.alpha_re;
            opt.seed = cfg.seed;
            res.candidates = find_subtraction_vector(res.lifted, tol, opt);
            struct Scored {
                SubtractionCandidate c;
                MuResult mu;
            };
            std::vector<Scored> scored;
            for (const auto& c : res.candidates) {
                try {
                    scored.push_back({c, max_subtraction_weight(res.lifted, c.alpha, tol)});
                } catch (const PreconditionError&) {
                }
            }
            if (scored.empty()) {
                res.notes.push_back("no admissible subtraction vector; subtraction skipped");
                return 0;
            }
            // Prefer a step that lowers r(rho^{T_A}), then Im(alpha) > 0.
            std::stable_sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
                auto key = [](const Scored& s) {
                    return std::make_tuple(s.mu.limiting_k == 1 ? 0 : 1, s.c.alpha.value.imag() > 0 ? 0 : 1,
                                           -s.c.alpha.value.imag());
                };
                return key(x) < key(y);
            });
            const Scored& best = scored.front();
            res.subtracted = true;
            res.subtraction_alpha = best.c.alpha;
            res.mu = best.mu;
            SymmetricState sub = subtract_product(res.lifted, best.c.alpha, best.mu.mu);
            if (sub.trace() <= 1e-12 * res.lifted.trace()) throw NumericError("subtraction removed the whole state");
            fin = sub;
            return 0;
        });
    } else if (cfg.subtract) {
        res.notes.push_back("subtraction implemented for four qubits only; skipped");
    }
    res.final_state = fin.normalized();
    record("final", res.final_state);
    res.final_min_pt_eigenvalue = min_pt_eigenvalue(res.final_state);
    if (!is_ppt(res.final_state, tol)) throw StageError("final", "final state is not PPT");

    res.extremality = stage("extremality", [&] { return extremality_test(res.final_state, tol); });
    if (res.final_state.num_qubits() == 4) {
        SolverOptions opt;
        opt.slice_re = cfg.alpha_re;
        opt.seed = cfg.seed;
        res.edge = stage("edge", [&] { return edge_test(res.final_state, tol, opt); });
    }
    return res;
}

}  // namespace pptsym
