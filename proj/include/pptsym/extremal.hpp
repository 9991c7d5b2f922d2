#pragma once

#include "pptsym/hilbert.hpp"
#include "pptsym/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pptsym {

// Orthonormal (Hilbert-Schmidt) real coordinates on n x n Hermitian
// matrices: diagonal units, then for i<j the pair (E_ij+E_ji)/sqrt2 and
// the Hermitian matrix with -i/sqrt2 at (i,j) and i/sqrt2 at (j,i).
RVec herm_to_coords(const CMat& h);
CMat coords_to_herm(const RVec& c, int n);

struct FixedPointSystem {
    int num_qubits = 0;
    std::vector<RMat> maps;  // P_0 ... P_M as orthogonal projections
    RMat composed;           // P_M ... P_1 P_0
    RVec state_coords;
    std::vector<int> ranks;  // ranks of rho^{T_k}
};

FixedPointSystem build_fixed_point_system(const SymmetricState& s, const Tolerances& tol = {});

struct SolutionSpace {
    int dimension = 0;
    RMat coords;              // columns, orthonormal
    std::vector<CMat> basis;  // the same columns as Hermitian matrices
    double max_equation_residual = 0.0;
    int intersection_dimension = 0;  // from the stacked individual equations
    bool consistent = true;
};

SolutionSpace solution_space(const FixedPointSystem& sys, double zero_tol = 1e-8);

struct ExtremalityReport {
    int solution_dim = 0;
    bool is_extremal = false;
    bool counting_bound_triggered = false;
    bool entangled_by_extremality = false;  // extremal with rank >= 2
    int rank = 0;
    std::vector<int> pt_ranks;
    std::vector<CMat> basis_of_solutions;
    double max_equation_residual = 0.0;
    bool consistent = true;
};

ExtremalityReport extremality_test(const SymmetricState& s, const Tolerances& tol = {});

enum class CountingSpace { General, Symmetric4 };

struct CountingBound {
    bool not_extremal = false;
    long lhs = 0;
    long threshold = 0;
    std::string note;
};

CountingBound counting_bound(const std::vector<int>& ranks, CountingSpace space, int num_qubits = 4,
                             int local_dim = 2);

struct CriticalPoint {
    double x = 0.0;        // signed step length
    int limiting_k = -1;   // which of rho, rho^{T_A}, ... becomes singular
    bool finite = false;
};

// Smallest positive and largest negative x at which some rho(x)^{T_k}
// acquires a new zero eigenvalue, rho(x) = (1 - x Tr h) rho + x h.
std::pair<CriticalPoint, CriticalPoint> critical_points(const SymmetricState& s, const CMat& h,
                                                        const Tolerances& tol = {});

SymmetricState step_state(const SymmetricState& s, const CMat& h, double x);

struct StepResult {
    SymmetricState state;
    CriticalPoint critical;
    std::vector<int> ranks_before, ranks_after;
};

StepResult rank_reduction_step(const SymmetricState& s, const CMat& h, const Tolerances& tol = {});

struct WalkStep {
    std::vector<int> ranks_before, ranks_after;
    double x_star = 0.0;
    int limiting_k = -1;
    RVec direction;  // HS coordinates of h
    SymmetricState state;
};

struct SearchConfig {
    SymmetricState start = SymmetricState::maximally_mixed(4);
    // Moves whose rank vector would drop below this floor are avoided while
    // an alternative exists.
    std::vector<int> rank_floor{5, 7, 7};
    int max_steps = 60;
    int candidates_per_step = 0;  // 0: 2 * dim + 4 random directions
    Tolerances tol{};
};

struct WalkTrace {
    std::uint64_t seed = 0;
    std::vector<WalkStep> steps;
    SymmetricState terminal;
    ExtremalityReport terminal_report;
    bool completed = false;
    std::string status;
};

WalkTrace extremal_search(std::uint64_t seed, const SearchConfig& cfg);

using Fingerprint = std::vector<std::vector<double>>;
Fingerprint spectral_fingerprint(const SymmetricState& s);
std::string fingerprint_key(const Fingerprint& f);

std::vector<int> pt_ranks(const SymmetricState& s, const Tolerances& tol);

}  // namespace pptsym
