#pragma once

#include "pptsym/hilbert.hpp"
#include "pptsym/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pptsym {

struct HorodeckiParams {
    int d = 4;
    double b = 0.5;
    double y() const;  // sqrt((1-b)/(1+b))
    void validate() const;
};

// Operator on C^2 (x) C^d, basis index a*d + i for |a,i>.
struct QubitQuditState {
    int d = 0;
    CMat matrix;
    bool trace_normalized = true;
};

QubitQuditState rho_insep(int d);
QubitQuditState rho_db(const HorodeckiParams& p);
// The same state assembled from its C, B_U, B_L blocks.
CMat rho_db_blocks(const HorodeckiParams& p);

// Transpose of the qubit factor.
CMat qubit_partial_transpose(const CMat& m, int d);

// max |rho^{T_A} - (1 (x) U) rho (1 (x) U^dag)| with U the anti-diagonal unit.
double verify_ppt_by_unitary(const HorodeckiParams& p);

struct RangeSearchConfig {
    int theta_grid = 720;
    int radial_grid = 60;
    Tolerances tol{};
};

struct ConditionEval {
    std::string branch;  // "alpha=0", "|alpha|=1", "infinity", "search"
    Alpha alpha;
    std::vector<double> residuals;  // one entry per range condition
    double range_residual = 0.0;    // numeric distance from R(rho^{T_A})
    bool passes = false;
};

struct RangeCriterionReport {
    bool entangled = false;
    std::vector<ConditionEval> tested_conditions;
    std::optional<Alpha> witness;
};

// Residuals of the range-membership conditions for the partially
// conjugated product vector built from alpha (alpha=inf not handled here).
std::vector<cplx> range_conditions(const HorodeckiParams& p, cplx alpha);

// Product vector (1,alpha) (x) (alpha^{d-1}+y, alpha^{d-2}, ..., 1) of R(rho_{d,b}).
CVec range_product_vector(const HorodeckiParams& p, const Alpha& a, bool conjugate_qubit);

RangeCriterionReport range_criterion_test(const HorodeckiParams& p, const RangeSearchConfig& cfg = {});

std::vector<CVec> kernel_basis(const HorodeckiParams& p);

struct ProductTerm {
    double weight = 0.0;
    CVec qubit;  // normalized
    CVec qudit;  // normalized
};

struct SeparableMixture {
    std::vector<ProductTerm> terms;
    double frobenius_error = 0.0;
    // Prefactor c with c * integral of P(phi) (x) Q(phi) = rho_{d,1}, and its
    // ratio to the literal 1/(16 pi).
    double fitted_prefactor = 0.0;
    double paper_constant_ratio = 0.0;
    CMat reconstruct() const;
};

SeparableMixture separable_decomposition_b1(int d, int nodes);

enum class HorodeckiVerdict { Entangled, Separable };

struct HorodeckiClassification {
    HorodeckiVerdict verdict;
    std::string reason;
};

// Boundary values use the explicit separable forms; interior values use
// the range criterion.
HorodeckiClassification classify_horodecki(const HorodeckiParams& p, const RangeSearchConfig& cfg = {});

}  // namespace pptsym
