#pragma once

#include "pptsym/extremal.hpp"
#include "pptsym/hilbert.hpp"
#include "pptsym/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pptsym {

enum class Verdict {
    SeparableByTheorem,
    SeparableByCertificate,
    GenericallySeparable,
    GenericallyNotEdge,
    NotEdgeProven,
    EdgeCandidate,
    ExtremalEntangled,
    Inconclusive,
};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct FoundVector {
    Alpha alpha;
    std::vector<double> range_residuals;  // rho, rho^{T_A}, rho^{T_AB}
};

struct EdgeTestReport {
    std::string case_tag;  // "5,7,9", "5,8,8", "5,8,7", "full-rank", ... or "dispatch-failed"
    std::string solver;
    int candidates = 0;
    std::vector<FoundVector> found_vectors;
    bool is_edge_counterexample = false;  // a product vector was found
    bool inconclusive = false;
    std::string note;
};

struct SymmetricKernelSchmidt {
    std::vector<double> lambdas;
    std::vector<CVec> vectors;  // orthonormal, S_2 orthonormal Dicke coordinates
    double reconstruction_error = 0.0;
    CMat w() const;             // sum_k lambda_k |e_k><e_k|
};

struct GramDecomposition {
    enum class Form { A3, A4 };
    Form form = Form::A4;
    int K = 0;
    std::vector<Alpha> alphas;
    // Term k is A_k (1,alpha_k)^{x4} + B_k c_k with c_k = (0,1)^{x4} (A4)
    // or (1,-alpha_k)^{x4} (A3); the state is sum_k |term_k><term_k|.
    std::vector<cplx> A, B;
    double reconstruction_error = 0.0;  // Frobenius, Dicke coordinates
    bool is_product_certificate = false;
    std::string method;
    CMat reconstruct() const;
};

struct Classification {
    Verdict verdict = Verdict::Inconclusive;
    Verdict rank_verdict = Verdict::Inconclusive;
    std::string justification;
    ThreeRank three_rank;
    std::optional<ExtremalityReport> extremality;
    std::optional<EdgeTestReport> edge;
    std::optional<GramDecomposition> decomposition;
};

Classification classify_by_ranks(const ThreeRank& tr);

struct SolverOptions {
    std::vector<double> slice_re{7.0};  // Re(alpha) lines for the (5,8,8) curve
    std::uint64_t seed = 1;
    double consistency_tol = 1e-8;
};

// T_A kernel vector in C^2 (x) S_3 coordinates (length 8).
std::vector<Alpha> solve_case_579(const CVec& psi);
// T_AB kernel vector in S_2 (x) S_2 coordinates (length 9), G-symmetric.
std::vector<Alpha> solve_case_588(const CVec& psi, const SolverOptions& opt = {});
// Two T_AB kernel vectors spanning a G-invariant plane.
std::vector<Alpha> solve_case_587(const CVec& psi1, const CVec& psi2);
// rho kernel vector in S_4 coordinates: roots of <e^{x4}|psi> = 0.
std::vector<Alpha> solve_rho_kernel(const CVec& psi);

SymmetricKernelSchmidt kernel_schmidt_symmetric(const CVec& psi);
// Psi as the 3x3 matrix T with Psi = sum_ab T_ab |D_a>|D_b>.
CMat kernel_matrix(const CVec& psi);
double g_symmetry_residual(const CVec& psi);

// Relative distances of the partially conjugated vectors from R(rho^{T_k}).
std::vector<double> product_range_residuals(const std::vector<RankProfile>& profiles, const Alpha& a);

EdgeTestReport edge_test(const SymmetricState& s, const Tolerances& tol = {}, const SolverOptions& opt = {});

struct DecomposeOptions {
    std::uint64_t seed = 12345;
    int multistarts = 60;
    double certificate_tol = 1e-6;
    Tolerances tol{};
};

std::optional<GramDecomposition> decompose_gram(const SymmetricState& s, GramDecomposition::Form form,
                                                const DecomposeOptions& opt = {});

// V on the last two qubits: S_4 -> S_2 (x) C^2, and W on qubits B and C back to S_4.
CMat v_hat(const CMat& rho_dicke4);
CMat w_hat(const CMat& sigma);

Classification certify(const SymmetricState& s, const Tolerances& tol = {}, const SolverOptions& opt = {},
                       const DecomposeOptions& dopt = {});

}  // namespace pptsym
