#include "pptsym/hilbert.hpp"

#include "pptsym/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace pptsym {

namespace {
void check_qubits(int n) {
    if (n < 1 || n > kMaxQubits)
        throw SizeError("number of qubits must be in [1, 12], got " + std::to_string(n));
}
}  // namespace

DickeBasis dicke_basis(int n) {
    check_qubits(n);
    const Eigen::Index dim = Eigen::Index(1) << n;
    DickeBasis b;
    b.num_qubits = n;
    b.vectors = RMat::Zero(dim, n + 1);
    b.orthonormal = RMat::Zero(dim, n + 1);
    b.norms.resize(n + 1);
    for (Eigen::Index x = 0; x < dim; ++x) b.vectors(x, std::popcount(static_cast<unsigned>(x))) = 1.0;
    for (int i = 0; i <= n; ++i) {
        b.norms[i] = binomial(n, i);
        b.orthonormal.col(i) = b.vectors.col(i) / std::sqrt(b.norms[i]);
    }
    return b;
}

CMat symmetric_projector(int n) {
    DickeBasis b = dicke_basis(n);
    return (b.orthonormal * b.orthonormal.transpose()).cast<cplx>();
}

CMat compress(const CMat& op, const DickeBasis& basis, double support_tol) {
    const Eigen::Index dim = basis.vectors.rows();
    if (op.rows() != dim || op.cols() != dim) throw SizeError("compress: dimension mismatch");
    CMat v = basis.orthonormal.cast<cplx>();
    CMat m = v.adjoint() * op * v;
    CMat back = v * m * v.adjoint();
    double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
    if ((back - op).cwiseAbs().maxCoeff() > support_tol * scale)
        throw SupportError("operator is not supported on the symmetric subspace");
    return m;
}

CMat expand(const CMat& m, const DickeBasis& basis) {
    if (m.rows() != basis.num_qubits + 1 || m.cols() != basis.num_qubits + 1)
        throw SizeError("expand: dimension mismatch");
    CMat v = basis.orthonormal.cast<cplx>();
    return v * m * v.adjoint();
}

PartitionSpec PartitionSpec::first(int k) {
    PartitionSpec s;
    for (int i = 1; i <= k; ++i) s.transposed_parties.push_back(i);
    return s;
}

CMat partial_transpose(const CMat& op, int n, const PartitionSpec& s) {
    check_qubits(n);
    const Eigen::Index dim = Eigen::Index(1) << n;
    if (op.rows() != dim || op.cols() != dim) throw SizeError("partial_transpose: dimension mismatch");
    Eigen::Index mask = 0;
    for (int p : s.transposed_parties) {
        if (p < 1 || p > n) throw SizeError("invalid party index " + std::to_string(p));
        mask |= Eigen::Index(1) << (n - p);
    }
    CMat out(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            Eigen::Index swap = (i ^ j) & mask;
            out(i ^ swap, j ^ swap) = op(i, j);
        }
    return out;
}

RMat split_isometry(int n, int k) {
    check_qubits(n);
    if (k < 0 || k > n) throw SizeError("split_isometry: k out of range");
    const int m = n - k;
    RMat j = RMat::Zero((k + 1) * (m + 1), n + 1);
    for (int a = 0; a <= k; ++a)
        for (int b = 0; b <= m; ++b)
            j(a * (m + 1) + b, a + b) =
                std::sqrt(binomial(k, a) * binomial(m, b) / binomial(n, a + b));
    return j;
}

SymmetricState::SymmetricState(int num_qubits, const CMat& dicke_matrix, const Tolerances& tol)
    : n_(num_qubits) {
    check_qubits(num_qubits);
    if (dicke_matrix.rows() != num_qubits + 1 || dicke_matrix.cols() != num_qubits + 1)
        throw SizeError("symmetric state matrix must be (N+1)x(N+1)");
    require_hermitian(dicke_matrix, tol, "symmetric state");
    m_ = hermitian_part(dicke_matrix);
}

SymmetricState SymmetricState::maximally_mixed(int n) {
    return SymmetricState(n, CMat::Identity(n + 1, n + 1) / double(n + 1));
}

SymmetricState SymmetricState::from_computational(int n, const CMat& op, const Tolerances& tol) {
    return SymmetricState(n, compress(op, dicke_basis(n)), tol);
}

SymmetricState SymmetricState::normalized() const {
    double t = trace();
    if (!(t > 0)) throw PreconditionError("cannot normalize an operator with nonpositive trace");
    SymmetricState s = *this;
    s.m_ /= t;
    return s;
}

CMat SymmetricState::to_computational() const { return expand(m_, dicke_basis(n_)); }

CMat compressed_pt(const CMat& rho, int n, int k) {
    if (k < 0 || k > n / 2) throw SizeError("compressed_pt: k must be in [0, floor(N/2)]");
    if (k == 0) return rho;
    RMat j = split_isometry(n, k);
    CMat x = j.cast<cplx>() * rho * j.transpose().cast<cplx>();
    const int m = n - k + 1;
    CMat out(x.rows(), x.cols());
    for (int a = 0; a <= k; ++a)
        for (int b = 0; b < m; ++b)
            for (int a2 = 0; a2 <= k; ++a2)
                for (int b2 = 0; b2 < m; ++b2) out(a * m + b, a2 * m + b2) = x(a2 * m + b, a * m + b2);
    return out;
}

CMat compressed_pt(const SymmetricState& s, int k) {
    return compressed_pt(s.matrix(), s.num_qubits(), k);
}

std::vector<CMat> pt_chain(const SymmetricState& s) {
    std::vector<CMat> out;
    for (int k = 0; k <= s.num_qubits() / 2; ++k) out.push_back(compressed_pt(s, k));
    return out;
}

double min_pt_eigenvalue(const SymmetricState& s) {
    double m = std::numeric_limits<double>::infinity();
    for (const CMat& x : pt_chain(s)) m = std::min(m, min_eigenvalue(x));
    return m;
}

bool is_ppt(const SymmetricState& s, const Tolerances& tol) {
    double scale = std::max(1.0, std::abs(s.trace()));
    return min_pt_eigenvalue(s) >= -tol.psd_tol * scale;
}

std::vector<RankProfile> pt_rank_profiles(const SymmetricState& s, const Tolerances& tol) {
    std::vector<RankProfile> out;
    for (const CMat& x : pt_chain(s)) out.push_back(rank_profile(x, tol));
    return out;
}

ThreeRank three_rank(const SymmetricState& s, const Tolerances& tol) {
    if (s.num_qubits() != 4) throw SizeError("three_rank requires four qubits");
    auto p = pt_rank_profiles(s, tol);
    return {p[0].rank, p[1].rank, p[2].rank, tol.rank_rel_tol};
}

CVec embed_product_vector(const Alpha& a, const std::vector<bool>& conjugate, int n) {
    check_qubits(n);
    if (static_cast<int>(conjugate.size()) != n) throw SizeError("conjugation pattern length must be N");
    CVec v = CVec::Ones(1);
    for (int p = 0; p < n; ++p) {
        CVec e(2);
        if (a.infinite)
            e << 0.0, 1.0;
        else
            e << 1.0, conjugate[p] ? std::conj(a.value) : a.value;
        CVec w(v.size() * 2);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            w(2 * i) = v(i) * e(0);
            w(2 * i + 1) = v(i) * e(1);
        }
        v = w;
    }
    return v;
}

CVec conjugated_product_dicke(const Alpha& a, int k, int n) {
    const int m = n - k;
    CVec v = CVec::Zero((k + 1) * (m + 1));
    if (a.infinite) {
        v(k * (m + 1) + m) = 1.0;
        return v;
    }
    cplx ac = std::conj(a.value);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= m; ++j)
            v(i * (m + 1) + j) = ipow(ac, i) * std::sqrt(binomial(k, i)) * ipow(a.value, j) *
                                 std::sqrt(binomial(m, j));
    return v;
}

}  // namespace pptsym
