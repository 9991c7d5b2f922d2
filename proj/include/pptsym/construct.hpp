#pragma once

#include "pptsym/classify.hpp"
#include "pptsym/extremal.hpp"
#include "pptsym/hilbert.hpp"
#include "pptsym/horodecki.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pptsym {

// TraceNormalized divides omega by its trace. Unnormalized applies the
// filters to 2((2d-1)b+1) rho_{d,b}, i.e. to the mixture written with
// unnormalized kets.
enum class OmegaScale { TraceNormalized, Unnormalized };
// Bare adds lambda P_N, Normalized adds lambda P_N / (N+1).
enum class ProjectorScale { Bare, Normalized };

struct FilterChain {
    int d = 5, dprime = 4;
    double b = 0.5, y = 0.0;
    std::vector<cplx> gammas;
    CMat F, F2, V;
};

FilterChain build_filter_chain(int d, int dprime, double b, const std::vector<cplx>& gammas);

QubitQuditState apply_filter_F(const QubitQuditState& s, double b);
QubitQuditState apply_filter_F2(const QubitQuditState& s, int dprime, const std::vector<cplx>& gammas);
// Result lives on N = d' qubits (unnormalized).
SymmetricState apply_filter_V(const QubitQuditState& s);

SymmetricState build_omega(const HorodeckiParams& p, int dprime, const std::vector<cplx>& gammas,
                           OmegaScale scale);

struct LambdaResult {
    double lambda = 0.0;
    int iterations = 0;
    int limiting_k = -1;
};

LambdaResult min_lambda_ppt(const SymmetricState& omega, ProjectorScale proj);
SymmetricState lift(const SymmetricState& omega, double lambda, ProjectorScale proj);

struct SubtractionCandidate {
    Alpha alpha;
    std::vector<double> range_residuals;
};

std::vector<SubtractionCandidate> find_subtraction_vector(const SymmetricState& s, const Tolerances& tol = {},
                                                          const SolverOptions& opt = {});

struct MuResult {
    double mu = 0.0;
    int limiting_k = -1;
    std::vector<double> per_k;  // 1 / <psi_k|(rho^{T_k})^+|psi_k>
};

MuResult max_subtraction_weight(const SymmetricState& s, const Alpha& a, const Tolerances& tol = {});
// s - mu |e><e|^{x4} with |e> normalized; not renormalized.
SymmetricState subtract_product(const SymmetricState& s, const Alpha& a, double mu);

struct PipelineConfig {
    int d = 5;
    int dprime = 4;
    double b = 0.5;
    std::vector<cplx> gammas{1.0 / std::sqrt(2.0), std::sqrt(2.0)};
    bool lambda_auto = true;
    double lambda_value = 0.0;
    bool subtract = true;
    OmegaScale omega_scale = OmegaScale::TraceNormalized;
    ProjectorScale projector_scale = ProjectorScale::Bare;
    std::vector<double> alpha_re{7.0};
    std::uint64_t seed = 1;
    Tolerances tol{};
};

struct StageRanks {
    std::string stage;
    std::vector<int> ranks;
};

struct PipelineResult {
    SymmetricState omega;
    double lambda_star = 0.0;
    int lambda_limiting_k = -1;
    SymmetricState lifted;
    bool subtracted = false;
    Alpha subtraction_alpha;
    std::vector<SubtractionCandidate> candidates;
    MuResult mu;
    SymmetricState final_state;  // trace one
    std::vector<StageRanks> stages;
    std::optional<ExtremalityReport> extremality;
    std::optional<EdgeTestReport> edge;
    double final_min_pt_eigenvalue = 0.0;
    std::vector<std::string> notes;
};

PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace pptsym
