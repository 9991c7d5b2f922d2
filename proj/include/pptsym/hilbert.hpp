#pragma once

#include "pptsym/linalg.hpp"

#include <array>
#include <vector>

namespace pptsym {

// Qubit ordering: party 1 is the most significant bit of a computational
// basis index, i.e. the slowest-varying tensor factor.

constexpr int kMaxQubits = 12;

struct DickeBasis {
    int num_qubits = 0;
    RMat vectors;               // 2^N x (N+1), columns |E_i^N>, integer entries
    std::vector<double> norms;  // squared norms C(N,i)
    RMat orthonormal;           // columns |D_i^N>
};

DickeBasis dicke_basis(int n);
CMat symmetric_projector(int n);

// (N+1)x(N+1) representation of an operator supported on S_N, and back.
CMat compress(const CMat& op, const DickeBasis& basis, double support_tol = 1e-10);
CMat expand(const CMat& m, const DickeBasis& basis);

struct PartitionSpec {
    std::vector<int> transposed_parties;  // 1-based
    static PartitionSpec first(int k);    // {1, ..., k}
};

CMat partial_transpose(const CMat& op, int num_qubits, const PartitionSpec& s);

// Isometry S_N -> S_k (x) S_{N-k} in orthonormal Dicke coordinates.
// Row index a*(N-k+1)+b for |D_a^k>|D_b^{N-k}>.
RMat split_isometry(int n, int k);

class SymmetricState {
public:
    SymmetricState() = default;
    // Validates shape, finiteness and Hermiticity; the matrix is symmetrized.
    SymmetricState(int num_qubits, const CMat& dicke_matrix, const Tolerances& tol = {});

    static SymmetricState maximally_mixed(int num_qubits);
    static SymmetricState from_computational(int num_qubits, const CMat& op,
                                             const Tolerances& tol = {});

    int num_qubits() const { return n_; }
    const CMat& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }
    bool trace_normalized() const { return std::abs(trace() - 1.0) <= 1e-12; }
    SymmetricState normalized() const;
    CMat to_computational() const;

private:
    int n_ = 0;
    CMat m_;
};

// Partial transpose of the first k parties, represented on S_k (x) S_{N-k}.
// k = 0 returns the Dicke matrix itself.
CMat compressed_pt(const SymmetricState& s, int k);
CMat compressed_pt(const CMat& dicke_matrix, int n, int k);

// rho, rho^{T_A}, rho^{T_AB}, ... up to k = floor(N/2).
std::vector<CMat> pt_chain(const SymmetricState& s);

double min_pt_eigenvalue(const SymmetricState& s);
bool is_ppt(const SymmetricState& s, const Tolerances& tol);

struct ThreeRank {
    int r = 0, r_ta = 0, r_tab = 0;
    double rank_rel_tol = 0.0;
    std::array<int, 3> as_array() const { return {r, r_ta, r_tab}; }
    int sum() const { return r + r_ta + r_tab; }
    bool operator==(const ThreeRank& o) const {
        return r == o.r && r_ta == o.r_ta && r_tab == o.r_tab;
    }
};

ThreeRank three_rank(const SymmetricState& s, const Tolerances& tol);
std::vector<RankProfile> pt_rank_profiles(const SymmetricState& s, const Tolerances& tol);

// Local vector (1, alpha), or (0, 1) for the point at infinity.
struct Alpha {
    cplx value{0.0, 0.0};
    bool infinite = false;
    static Alpha at(cplx a) { return {a, false}; }
    static Alpha infinity() { return {cplx(0), true}; }
};

// Tensor product of (1,alpha) or its conjugate per party in C^{2^N}.
CVec embed_product_vector(const Alpha& a, const std::vector<bool>& conjugate, int n);

// The same vector with the first k parties conjugated, expressed in the
// orthonormal coordinates of S_k (x) S_{N-k} (unnormalized vector).
CVec conjugated_product_dicke(const Alpha& a, int k, int n);

}  // namespace pptsym
