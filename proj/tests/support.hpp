#pragma once

// Shared fixtures for the test binaries: independent brute-force oracles and
// random state generators.

#include "pptsym/errors.hpp"
#include "pptsym/extremal.hpp"
#include "pptsym/hilbert.hpp"
#include "pptsym/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace testsupport {

using namespace pptsym;

inline cplx randc(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng)};
}

inline CMat random_complex(int r, int c, std::mt19937_64& rng) {
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = randc(rng);
    return m;
}

inline CMat random_hermitian(int n, std::mt19937_64& rng) {
    CMat g = random_complex(n, n, rng);
    return (g + g.adjoint()) / 2.0;
}

// Unnormalized Dicke vector built by enumerating bit strings.
inline CVec brute_dicke(int n, int i) {
    CVec v = CVec::Zero(1 << n);
    for (int x = 0; x < (1 << n); ++x)
        if (std::popcount(static_cast<unsigned>(x)) == i) v(x) = 1.0;
    return v;
}

inline CMat brute_dicke_isometry(int n) {
    CMat v(1 << n, n + 1);
    for (int i = 0; i <= n; ++i) v.col(i) = brute_dicke(n, i).normalized();
    return v;
}

// Qubit permutation operator: party p of the input goes to slot perm[p].
// Party 1 is the most significant bit.
inline CMat permutation_operator(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    const int dim = 1 << n;
    CMat p = CMat::Zero(dim, dim);
    for (int x = 0; x < dim; ++x) {
        int y = 0;
        for (int q = 0; q < n; ++q) {
            int bit = (x >> (n - 1 - q)) & 1;
            y |= bit << (n - 1 - perm[q]);
        }
        p(y, x) = 1.0;
    }
    return p;
}

// Average over all N! qubit permutations.
inline CMat brute_symmetrizer(int n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CMat acc = CMat::Zero(1 << n, 1 << n);
    int count = 0;
    do {
        acc += permutation_operator(perm);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / static_cast<double>(count);
}

// Partial transpose by explicit digit manipulation on a 2^N matrix.
inline CMat brute_partial_transpose(const CMat& m, int n, const std::vector<int>& parties) {
    const int dim = 1 << n;
    CMat out(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            int rr = r, cc = c;
            for (int p : parties) {
                const int shift = n - p;
                const int br = (r >> shift) & 1, bc = (c >> shift) & 1;
                rr = (rr & ~(1 << shift)) | (bc << shift);
                cc = (cc & ~(1 << shift)) | (br << shift);
            }
            out(rr, cc) = m(r, c);
        }
    return out;
}

inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVec local(const Alpha& a, bool conj) {
    CVec v(2);
    if (a.infinite) {
        v << 0.0, 1.0;
    } else {
        v << 1.0, conj ? std::conj(a.value) : a.value;
    }
    return v;
}

inline CVec kron_vec(const std::vector<CVec>& vs) {
    CMat acc = CMat::Ones(1, 1);
    for (const auto& v : vs) acc = kron(acc, CMat(v));
    return acc.col(0);
}

// |e>^{x4} in orthonormal Dicke coordinates, computed through the full space.
inline CVec product_dicke(const Alpha& a, int n) {
    std::vector<CVec> vs(n, local(a, false));
    return brute_dicke_isometry(n).adjoint() * kron_vec(vs);
}

inline int numeric_rank(const CMat& m, double rel = 1e-8) {
    Eigen::JacobiSVD<CMat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++r;
    return r;
}

inline double min_eig(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// Mixture of random symmetric product states; generically full rank.
inline SymmetricState random_separable(int n, int terms, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    CMat m = CMat::Zero(n + 1, n + 1);
    for (int t = 0; t < terms; ++t) {
        CVec v = product_dicke(Alpha::at(randc(rng)), n).normalized();
        m += u(rng) * v * v.adjoint();
    }
    return SymmetricState(n, m / m.trace().real());
}

// Random walk by rank-reduction steps that never lets a rank fall below
// target and stops once the ranks equal target.
inline std::optional<SymmetricState> descend_to(const SymmetricState& start, const std::vector<int>& target,
                                                std::mt19937_64& rng, int max_steps = 40) {
    const Tolerances tol;
    std::normal_distribution<double> normal(0.0, 1.0);
    SymmetricState cur = start.normalized();
    const int dim = cur.num_qubits() + 1;
    for (int step = 0; step < max_steps; ++step) {
        std::vector<int> ranks = pt_ranks(cur, tol);
        if (ranks == target) return cur;
        for (size_t i = 0; i < ranks.size(); ++i)
            if (ranks[i] < target[i]) return std::nullopt;
        FixedPointSystem sys = build_fixed_point_system(cur, tol);
        SolutionSpace sp = solution_space(sys);
        if (sp.dimension <= 1) return std::nullopt;
        RVec c = sys.state_coords.normalized();
        RMat sdir = sp.coords - c * (c.transpose() * sp.coords);
        Eigen::JacobiSVD<RMat> svd(sdir, Eigen::ComputeThinU);
        int r = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-8) ++r;
        if (r == 0) return std::nullopt;
        RMat basis = svd.matrixU().leftCols(r);
        std::vector<SymmetricState> ok;
        for (int t = 0; t < 2 * r + 4; ++t) {
            RVec g(r);
            for (int i = 0; i < r; ++i) g(i) = normal(rng);
            CMat h = coords_to_herm((basis * g).normalized(), dim);
            auto [pos, neg] = critical_points(cur, h, tol);
            for (const CriticalPoint& cp : {pos, neg}) {
                if (!cp.finite) continue;
                SymmetricState nx = step_state(cur, h, cp.x).normalized();
                std::vector<int> rk = pt_ranks(nx, tol);
                bool fine = is_ppt(nx, tol) && rk != ranks;
                for (size_t i = 0; i < rk.size(); ++i) fine = fine && rk[i] >= target[i] && rk[i] <= ranks[i];
                if (fine) ok.push_back(nx);
            }
        }
        if (ok.empty()) return std::nullopt;
        std::uniform_int_distribution<size_t> pick(0, ok.size() - 1);
        cur = ok[pick(rng)];
    }
    return std::nullopt;
}

inline SymmetricState random_state_with_ranks(const std::vector<int>& target, std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        auto s = descend_to(random_separable(4, 12, rng), target, rng);
        if (s) return *s;
    }
    throw NumericError("could not reach the requested rank profile");
}

struct Planted {
    SymmetricState state;
    Alpha alpha;
};

// sigma of ranks `below` plus a weighted product projector at alpha; the
// product vector lies in every range by construction.
inline Planted planted_state(const std::vector<int>& below, const std::vector<int>& target, const Alpha& a,
                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 0.5);
    for (int attempt = 0; attempt < 50; ++attempt) {
        SymmetricState sigma = random_state_with_ranks(below, rng);
        CVec v = product_dicke(a, 4).normalized();
        SymmetricState rho(4, sigma.matrix() + u(rng) * v * v.adjoint());
        rho = rho.normalized();
        if (pt_ranks(rho, Tolerances{}) == target) return {rho, a};
    }
    throw NumericError("planting failed");
}

// <v|psi> for v the conjugated product vector of S_k (x) S_{4-k}, built
// through the full space.
inline cplx kernel_overlap(const CVec& psi, const Alpha& a, int k) {
    std::vector<CVec> vs;
    for (int p = 0; p < 4; ++p) vs.push_back(local(a, p < k));
    CVec full = kron_vec(vs);
    CMat iso = k == 0 ? brute_dicke_isometry(4) : kron(brute_dicke_isometry(k), brute_dicke_isometry(4 - k));
    return (iso.adjoint() * full).dot(psi);
}

inline CVec remove_component(CVec psi, const CVec& v) {
    return psi - v * (v.dot(psi) / v.squaredNorm());
}

// Random vector of C^2 (x) S_3 orthogonal to the partially conjugated
// product vector at a.
inline CVec planted_579_kernel(const Alpha& a, std::mt19937_64& rng) {
    CVec v = kron(CMat::Identity(2, 2), brute_dicke_isometry(3)).adjoint() *
             kron_vec({local(a, true), local(a, false), local(a, false), local(a, false)});
    return remove_component(random_complex(8, 1, rng).col(0), v);
}

inline CVec s2s2_vector(const CMat& t) {
    CVec psi(9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) psi(a * 3 + b) = t(a, b);
    return psi;
}

// Hermitian T (as a vector of S_2 (x) S_2) with <v|psi> = 0 at a.
inline CVec planted_588_kernel(const Alpha& a, std::mt19937_64& rng) {
    CMat t1 = random_hermitian(3, rng), t2 = random_hermitian(3, rng);
    cplx g1 = kernel_overlap(s2s2_vector(t1), a, 2), g2 = kernel_overlap(s2s2_vector(t2), a, 2);
    return s2s2_vector(t1 - (g1.real() / g2.real()) * t2);
}

// Two Hermitian kernel vectors vanishing at a, mixed by a random complex
// invertible 2x2 matrix.
inline std::pair<CVec, CVec> planted_587_kernel(const Alpha& a, std::mt19937_64& rng) {
    CMat t[3] = {random_hermitian(3, rng), random_hermitian(3, rng), random_hermitian(3, rng)};
    double g[3];
    for (int i = 0; i < 3; ++i) g[i] = kernel_overlap(s2s2_vector(t[i]), a, 2).real();
    CVec p1 = s2s2_vector(t[0] - (g[0] / g[2]) * t[2]);
    CVec p2 = s2s2_vector(t[1] - (g[1] / g[2]) * t[2]);
    cplx c11 = randc(rng), c12 = randc(rng), c21 = randc(rng), c22 = randc(rng);
    return {c11 * p1 + c12 * p2, c21 * p1 + c22 * p2};
}

inline CVec planted_rho_kernel(const Alpha& a, std::mt19937_64& rng) {
    return remove_component(random_complex(5, 1, rng).col(0), product_dicke(a, 4));
}

inline double alpha_distance(const Alpha& a, const Alpha& b) {
    if (a.infinite || b.infinite) return (a.infinite && b.infinite) ? 0.0 : 1e300;
    return std::abs(a.value - b.value);
}

inline double nearest_alpha(const std::vector<Alpha>& found, const Alpha& a) {
    double best = 1e300;
    for (const Alpha& f : found) best = std::min(best, alpha_distance(f, a));
    return best;
}

}  // namespace testsupport
