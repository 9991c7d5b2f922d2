#include "pptsym/classify.hpp"
#include "pptsym/errors.hpp"
#include "pptsym/nls.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pptsym {

namespace {

// (1,alpha)^{x4} in orthonormal Dicke coordinates; (0,1)^{x4} at infinity.
CVec atom(const Alpha& a) {
    CVec v = CVec::Zero(5);
    if (a.infinite) {
        v(4) = 1.0;
        return v;
    }
    for (int m = 0; m < 5; ++m) v(m) = std::sqrt(binomial(4, m)) * ipow(a.value, m);
    return v;
}

CVec companion(const GramDecomposition& g, size_t k) {
    if (g.form == GramDecomposition::Form::A4) return atom(Alpha::infinity());
    if (g.alphas[k].infinite) return atom(Alpha::infinity());
    return atom(Alpha::at(-g.alphas[k].value));
}

GramDecomposition product_mixture(const std::vector<Alpha>& alphas, const std::vector<double>& w,
                                  const CMat& rho, const std::string& method) {
    GramDecomposition g;
    g.form = GramDecomposition::Form::A4;
    g.method = method;
    for (size_t k = 0; k < alphas.size(); ++k) {
        if (w[k] <= 0) continue;
        g.alphas.push_back(alphas[k]);
        g.A.push_back(std::sqrt(w[k]));
        g.B.push_back(0.0);
    }
    g.K = static_cast<int>(g.alphas.size());
    g.reconstruction_error = (g.reconstruct() - rho).norm();
    g.is_product_certificate = true;
    return g;
}

// Matrix-pencil recovery of up to four finite atoms plus the atom at infinity.
std::optional<GramDecomposition> pencil_route(const CMat& rho) {
    CMat r(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r(i, j) = rho(i, j) / std::sqrt(binomial(4, i) * binomial(4, j));
    CMat x = r.topLeftCorner(4, 4), y = r.block(1, 0, 4, 4);
    Eigen::JacobiSVD<CMat> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec& sv = svd.singularValues();
    std::vector<Alpha> alphas;
    std::vector<double> w;
    int k = 0;
    if (sv(0) > 0)
        for (int i = 0; i < 4; ++i)
            if (sv(i) > 1e-9 * sv(0)) ++k;
    if (k > 0) {
        if (sv(0) / sv(k - 1) > 1e10) return std::nullopt;
        CMat uk = svd.matrixU().leftCols(k), vk = svd.matrixV().leftCols(k);
        RVec sinv = sv.head(k).cwiseInverse();
        CMat z = uk.adjoint() * y * vk * sinv.asDiagonal();
        Eigen::ComplexEigenSolver<CMat> es(z);
        RMat lsq(32, k);
        RVec rhs(32);
        for (int i = 0; i < k; ++i) {
            cplx a = es.eigenvalues()(i);
            alphas.push_back(Alpha::at(a));
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) {
                    cplx m = ipow(a, p) * ipow(std::conj(a), q);
                    lsq(2 * (p * 4 + q), i) = m.real();
                    lsq(2 * (p * 4 + q) + 1, i) = m.imag();
                }
        }
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) {
                rhs(2 * (p * 4 + q)) = x(p, q).real();
                rhs(2 * (p * 4 + q) + 1) = x(p, q).imag();
            }
        RVec a = lsq.colPivHouseholderQr().solve(rhs);
        for (int i = 0; i < k; ++i) w.push_back(a(i));
    }
    double binf = r(4, 4).real();
    for (size_t i = 0; i < alphas.size(); ++i) binf -= w[i] * std::pow(std::abs(alphas[i].value), 8);
    alphas.push_back(Alpha::infinity());
    w.push_back(binf);
    const double scale = std::max(1e-300, rho.norm());
    for (double& v : w) {
        if (v < -1e-12 * scale) return std::nullopt;
        if (v < 1e-14 * scale) v = 0;
    }
    return product_mixture(alphas, w, rho, "matrix-pencil");
}

// Product vectors from the kernel equations, weights by nonnegative least squares.
std::optional<GramDecomposition> kernel_route(const SymmetricState& s, const Tolerances& tol) {
    auto prof = pt_rank_profiles(s, tol);
    std::vector<Alpha> cands;
    auto add = [&](const std::vector<Alpha>& v) { cands.insert(cands.end(), v.begin(), v.end()); };
    try {
        if (prof[0].kernel_dim() >= 1)
            add(solve_rho_kernel(prof[0].kernel_basis.col(0)));
        else if (prof[1].kernel_dim() >= 1)
            add(solve_case_579(prof[1].kernel_basis.col(0)));
        else if (prof[2].kernel_dim() >= 2)
            add(solve_case_587(prof[2].kernel_basis.col(0), prof[2].kernel_basis.col(1)));
        else
            return std::nullopt;
    } catch (const Error&) {
        return std::nullopt;
    }
    cands.push_back(Alpha::infinity());
    std::vector<Alpha> good;
    for (const Alpha& a : cands) {
        auto r = product_range_residuals(prof, a);
        if (*std::max_element(r.begin(), r.end()) <= 1e-7) good.push_back(a);
    }
    if (good.empty()) return std::nullopt;
    RMat cols(50, good.size());
    for (size_t j = 0; j < good.size(); ++j) {
        CVec v = atom(good[j]).normalized();
        CMat p = v * v.adjoint();
        for (int i = 0; i < 25; ++i) {
            cols(i, j) = p.data()[i].real();
            cols(25 + i, j) = p.data()[i].imag();
        }
    }
    RVec rhs(50);
    for (int i = 0; i < 25; ++i) {
        rhs(i) = s.matrix().data()[i].real();
        rhs(25 + i) = s.matrix().data()[i].imag();
    }
    RVec w = nnls(cols, rhs);
    std::vector<double> wt;
    for (size_t j = 0; j < good.size(); ++j) wt.push_back(w(j) / atom(good[j]).squaredNorm());
    return product_mixture(good, wt, s.matrix(), "kernel-roots+nnls");
}

// Seeded multistart least squares over K finite atoms and the atom at infinity.
std::optional<GramDecomposition> nls_route(const CMat& rho, const DecomposeOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double tr = rho.trace().real();
    std::optional<GramDecomposition> best;
    for (int K = 1; K <= 6; ++K) {
        const int n = 3 * K + 1;
        ResidualFn f = [&](const RVec& x, RVec& r) {
            CMat m = CMat::Zero(5, 5);
            for (int k = 0; k < K; ++k) {
                CVec v = atom(Alpha::at(cplx(x(3 * k), x(3 * k + 1))));
                m += x(3 * k + 2) * x(3 * k + 2) * v * v.adjoint();
            }
            m(4, 4) += x(3 * K) * x(3 * K);
            r = herm_to_coords(m - rho);
        };
        for (int st = 0; st < opt.multistarts; ++st) {
            RVec x0(n);
            for (int k = 0; k < K; ++k) {
                double rad = std::exp(0.7 * nd(rng));
                double th = 2 * std::numbers::pi * std::uniform_real_distribution<double>(0, 1)(rng);
                x0(3 * k) = rad * std::cos(th);
                x0(3 * k + 1) = rad * std::sin(th);
                x0(3 * k + 2) = std::sqrt(tr / (K * std::pow(1 + rad * rad, 4)));
            }
            x0(3 * K) = 0.1 * std::sqrt(tr);
            LsqResult res = least_squares(f, 25, x0, 3000);
            if (res.residual_norm > 1e-9 * std::max(1.0, rho.norm())) continue;
            std::vector<Alpha> al;
            std::vector<double> w;
            for (int k = 0; k < K; ++k) {
                al.push_back(Alpha::at(cplx(res.x(3 * k), res.x(3 * k + 1))));
                w.push_back(res.x(3 * k + 2) * res.x(3 * k + 2));
            }
            al.push_back(Alpha::infinity());
            w.push_back(res.x(3 * K) * res.x(3 * K));
            GramDecomposition g = product_mixture(al, w, rho, "least-squares");
            if (!best || g.reconstruction_error < best->reconstruction_error) best = g;
            return best;
        }
    }
    return best;
}

// Coherent terms A_k (1,a_k)^{x4} + B_k (0,1)^{x4}. In unnormalized Dicke
// coefficients the leading 4x4 block is sum_k A_k^2 a_k^i conj(a_k)^j, so the
// a_k come from that block (shift pencil for K <= 3, least squares above),
// B_k from the last row, and a final joint fit polishes everything.
std::optional<GramDecomposition> coherent_route(const CMat& rho, const DecomposeOptions& opt) {
    CMat r(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r(i, j) = rho(i, j) / std::sqrt(binomial(4, i) * binomial(4, j));
    const CMat block = r.topLeftCorner(4, 4);
    const double tr = block.trace().real();
    const double limit = 1e-10 * std::max(1.0, rho.norm());
    std::mt19937_64 rng(opt.seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    Eigen::JacobiSVD<CMat> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
    int rank = 0;
    for (int i = 0; i < 4; ++i)
        if (svd.singularValues()(i) > 1e-9 * std::max(1e-300, svd.singularValues()(0))) ++rank;

    auto block_weights = [&](const std::vector<cplx>& al) {
        const int k = static_cast<int>(al.size());
        RMat lsq(32, k);
        RVec rhs(32);
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) {
                for (int i = 0; i < k; ++i) {
                    cplx m = ipow(al[i], p) * ipow(std::conj(al[i]), q);
                    lsq(2 * (p * 4 + q), i) = m.real();
                    lsq(2 * (p * 4 + q) + 1, i) = m.imag();
                }
                rhs(2 * (p * 4 + q)) = block(p, q).real();
                rhs(2 * (p * 4 + q) + 1) = block(p, q).imag();
            }
        return RVec(lsq.colPivHouseholderQr().solve(rhs));
    };

    // Joint fit of (Re a, Im a, A, Re B, Im B) per term against rho.
    auto polish = [&](RVec x, int K) {
        ResidualFn f = [&](const RVec& y, RVec& res) {
            CMat m = CMat::Zero(5, 5);
            for (int k = 0; k < K; ++k) {
                CVec v = y(5 * k + 2) * atom(Alpha::at(cplx(y(5 * k), y(5 * k + 1))));
                v(4) += cplx(y(5 * k + 3), y(5 * k + 4));
                m += v * v.adjoint();
            }
            res.setZero();
            res.head(25) = herm_to_coords(m - rho);
        };
        return least_squares(f, std::max(25, 5 * K), x, 6000);
    };

    for (int K = std::max(rank, 1); K <= 6; ++K) {
        const int starts = (K <= 3 && K == rank) ? 1 : opt.multistarts;
        for (int st = 0; st < starts; ++st) {
            std::vector<cplx> al;
            if (K <= 3 && K == rank) {
                // X = rows 0..2, Y = rows 1..3; Y = X shifted by diag(a).
                CMat x = block.topRows(3), y = block.bottomRows(3);
                Eigen::JacobiSVD<CMat> sx(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
                CMat uk = sx.matrixU().leftCols(K), vk = sx.matrixV().leftCols(K);
                RVec sinv = sx.singularValues().head(K).cwiseInverse();
                CMat z = uk.adjoint() * y * vk * sinv.asDiagonal();
                Eigen::ComplexEigenSolver<CMat> es(z);
                for (int i = 0; i < K; ++i) al.push_back(es.eigenvalues()(i));
            } else {
                const int n = 3 * K;
                ResidualFn f = [&](const RVec& y, RVec& res) {
                    CMat m = CMat::Zero(4, 4);
                    for (int k = 0; k < K; ++k) {
                        cplx a(y(3 * k), y(3 * k + 1));
                        CVec w(4);
                        for (int p = 0; p < 4; ++p) w(p) = ipow(a, p);
                        m += y(3 * k + 2) * y(3 * k + 2) * w * w.adjoint();
                    }
                    res.setZero();
                    res.head(16) = herm_to_coords(m - block);
                };
                RVec x0(n);
                for (int k = 0; k < K; ++k) {
                    double rad = std::exp(0.6 * nd(rng));
                    double th = 2 * std::numbers::pi * u01(rng);
                    x0(3 * k) = rad * std::cos(th);
                    x0(3 * k + 1) = rad * std::sin(th);
                    x0(3 * k + 2) = std::sqrt(tr / (K * (1 + rad * rad * (1 + rad * rad * (1 + rad * rad)))));
                }
                LsqResult res = least_squares(f, std::max(16, n), x0, 3000);
                if (res.residual_norm > 1e-7 * std::max(1.0, block.norm())) continue;
                for (int k = 0; k < K; ++k) al.push_back(cplx(res.x(3 * k), res.x(3 * k + 1)));
            }
            RVec c = block_weights(al);
            if (c.minCoeff() < -1e-9 * std::max(1.0, tr)) continue;
            std::vector<double> amp(K);
            for (int k = 0; k < K; ++k) amp[k] = std::sqrt(std::max(0.0, c(k)));
            // Last row: r(4,j) - sum c a^4 conj(a)^j = sum_k A_k conj(a_k)^j B_k.
            CMat m(4, K);
            CVec rhs(4);
            for (int j = 0; j < 4; ++j) {
                rhs(j) = r(4, j);
                for (int k = 0; k < K; ++k) {
                    rhs(j) -= c(k) * ipow(al[k], 4) * ipow(std::conj(al[k]), j);
                    m(j, k) = amp[k] * ipow(std::conj(al[k]), j);
                }
            }
            CVec b = m.completeOrthogonalDecomposition().solve(rhs);
            RVec x(5 * K);
            for (int k = 0; k < K; ++k) {
                x(5 * k) = al[k].real();
                x(5 * k + 1) = al[k].imag();
                x(5 * k + 2) = amp[k];
                x(5 * k + 3) = b(k).real();
                x(5 * k + 4) = b(k).imag();
            }
            LsqResult res = polish(x, K);
            if (res.residual_norm > limit) continue;
            GramDecomposition g;
            g.form = GramDecomposition::Form::A4;
            g.method = K == rank && K <= 3 ? "coherent-pencil" : "coherent-least-squares";
            g.K = K;
            bool product = true;
            const double tiny = 1e-9 * std::sqrt(std::max(tr, 1e-300));
            for (int k = 0; k < K; ++k) {
                double a = res.x(5 * k + 2);
                cplx bk(res.x(5 * k + 3), res.x(5 * k + 4));
                cplx al_k(res.x(5 * k), res.x(5 * k + 1));
                if (a < 0) {
                    a = -a;
                    bk = -bk;
                }
                g.alphas.push_back(Alpha::at(al_k));
                g.A.push_back(a);
                g.B.push_back(bk);
                if (a > tiny && std::abs(bk) > tiny) product = false;
            }
            g.reconstruction_error = (g.reconstruct() - rho).norm();
            g.is_product_certificate = product;
            return g;
        }
    }
    return std::nullopt;
}

// Terms A (1,a)^{x4} + B (1,-a)^{x4}, fitted after the V map and mapped back.
std::optional<GramDecomposition> a3_route(const CMat& rho, const DecomposeOptions& opt,
                                          const std::vector<Alpha>& seeds) {
    CMat sigma = v_hat(rho);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double tr = rho.trace().real();
    auto term_sigma = [](cplx a, cplx A, cplx B) {
        CVec e(3), f(2);
        e << A + B, std::sqrt(2.0) * (A - B) * a, (A + B) * a * a;
        f << 1.0, a * a;
        CVec v(6);
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c) v(i * 2 + c) = e(i) * f(c);
        return CVec(v);
    };
    for (int K = 1; K <= 6; ++K) {
        const int n = 5 * K;
        ResidualFn f = [&](const RVec& x, RVec& r) {
            CMat m = CMat::Zero(6, 6);
            for (int k = 0; k < K; ++k) {
                CVec v = term_sigma(cplx(x(5 * k), x(5 * k + 1)), x(5 * k + 2), cplx(x(5 * k + 3), x(5 * k + 4)));
                m += v * v.adjoint();
            }
            r = herm_to_coords(m - sigma);
        };
        for (int st = 0; st < opt.multistarts; ++st) {
            RVec x0(n);
            for (int k = 0; k < K; ++k) {
                cplx a;
                if (st == 0 && k < static_cast<int>(seeds.size()) && !seeds[k].infinite)
                    a = seeds[k].value;
                else
                    a = std::polar(std::exp(0.7 * nd(rng)), 2 * std::numbers::pi * std::uniform_real_distribution<double>(0, 1)(rng));
                x0(5 * k) = a.real();
                x0(5 * k + 1) = a.imag();
                double amp = std::sqrt(tr / (K * std::pow(1 + std::norm(a), 4)));
                x0(5 * k + 2) = amp;
                x0(5 * k + 3) = 0.3 * amp * nd(rng);
                x0(5 * k + 4) = 0.3 * amp * nd(rng);
            }
            LsqResult res = least_squares(f, 36, x0, 4000);
            if (res.residual_norm > 1e-9 * std::max(1.0, sigma.norm())) continue;
            GramDecomposition g;
            g.form = GramDecomposition::Form::A3;
            g.method = "v-map least-squares";
            g.K = K;
            bool product = true;
            for (int k = 0; k < K; ++k) {
                cplx A = res.x(5 * k + 2), B(res.x(5 * k + 3), res.x(5 * k + 4));
                g.alphas.push_back(Alpha::at(cplx(res.x(5 * k), res.x(5 * k + 1))));
                g.A.push_back(A);
                g.B.push_back(B);
                double tiny = 1e-9 * std::sqrt(tr);
                if (std::abs(A) > tiny && std::abs(B) > tiny) product = false;
            }
            CMat fitted = CMat::Zero(6, 6);
            for (int k = 0; k < K; ++k) {
                CVec v = term_sigma(g.alphas[k].value, g.A[k], g.B[k]);
                fitted += v * v.adjoint();
            }
            CMat back = w_hat(fitted);
            g.reconstruction_error = std::max((g.reconstruct() - rho).norm(), (back - rho).norm());
            g.is_product_certificate = product;
            return g;
        }
    }
    return std::nullopt;
}

}  // namespace

CMat GramDecomposition::reconstruct() const {
    CMat m = CMat::Zero(5, 5);
    for (size_t k = 0; k < alphas.size(); ++k) {
        CVec v = A[k] * atom(alphas[k]);
        if (B[k] != cplx(0)) v += B[k] * companion(*this, k);
        m += v * v.adjoint();
    }
    return m;
}

namespace {
// Isometry from S_2 (x) C^2 into three qubits.
RMat s2c2_isometry() {
    DickeBasis d2 = dicke_basis(2);
    RMat q = RMat::Zero(8, 6);
    for (int a = 0; a < 3; ++a)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 2; ++c) q(x * 2 + c, a * 2 + c) = d2.orthonormal(x, a);
    return q;
}
}  // namespace

CMat v_hat(const CMat& rho) {
    if (rho.rows() != 5 || rho.cols() != 5) throw SizeError("v_hat expects a four-qubit Dicke matrix");
    CMat full = expand(rho, dicke_basis(4));
    // V = |0><00| + |1><11| on qubits C, D.
    RMat l = RMat::Zero(8, 16);
    for (int ab = 0; ab < 4; ++ab) {
        l(ab * 2 + 0, ab * 4 + 0) = 1.0;
        l(ab * 2 + 1, ab * 4 + 3) = 1.0;
    }
    CMat s8 = l.cast<cplx>() * full * l.transpose().cast<cplx>();
    RMat q = s2c2_isometry();
    return q.transpose().cast<cplx>() * s8 * q.cast<cplx>();
}

CMat w_hat(const CMat& sigma) {
    if (sigma.rows() != 6 || sigma.cols() != 6) throw SizeError("w_hat expects an S_2 (x) C^2 operator");
    RMat q = s2c2_isometry();
    CMat s8 = q.cast<cplx>() * sigma * q.transpose().cast<cplx>();
    // W on qubits B and C': |00>->|000>, |01>->|E_2^3>, |10>->|E_1^3>, |11>->|111>.
    RMat w = RMat::Zero(8, 4);
    w(0, 0) = 1.0;
    w(3, 1) = w(5, 1) = w(6, 1) = 1.0;
    w(1, 2) = w(2, 2) = w(4, 2) = 1.0;
    w(7, 3) = 1.0;
    RMat m = RMat::Zero(16, 8);
    for (int a = 0; a < 2; ++a) m.block(a * 8, a * 4, 8, 4) = w;
    CMat full = m.cast<cplx>() * s8 * m.transpose().cast<cplx>();
    return compress(full, dicke_basis(4), 1e-8);
}

std::optional<GramDecomposition> decompose_gram(const SymmetricState& s, GramDecomposition::Form form,
                                                const DecomposeOptions& opt) {
    if (s.num_qubits() != 4) throw SizeError("decompose_gram requires four qubits");
    const CMat& rho = s.matrix();
    const double limit = opt.certificate_tol * std::max(1.0, rho.norm());
    auto accept = [&](const std::optional<GramDecomposition>& g) {
        return g && g->reconstruction_error <= limit;
    };
    std::vector<Alpha> seeds;
    std::optional<GramDecomposition> g = pencil_route(rho);
    if (!accept(g)) g = kernel_route(s, opt.tol);
    if (!accept(g) && form == GramDecomposition::Form::A4) g = nls_route(rho, opt);
    if (!accept(g) && form == GramDecomposition::Form::A4) g = coherent_route(rho, opt);
    if (form == GramDecomposition::Form::A4) return accept(g) ? g : std::nullopt;

    if (accept(g) && g->K <= 6) seeds = g->alphas;
    auto a3 = a3_route(rho, opt, seeds);
    if (accept(a3)) return a3;
    return std::nullopt;
}

}  // namespace pptsym
