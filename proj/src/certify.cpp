#include "pptsym/classify.hpp"
#include "pptsym/errors.hpp"

namespace pptsym {

Classification certify(const SymmetricState& s, const Tolerances& tol, const SolverOptions& opt,
                       const DecomposeOptions& dopt) {
    if (s.num_qubits() != 4) throw SizeError("certify requires four qubits");
    if (!is_ppt(s, tol)) throw PreconditionError("certify requires a PPT state");
    Classification c;
    try {
        c = classify_by_ranks(three_rank(s, tol));
    } catch (const Error& e) {
        throw StageError("ranks", e.what());
    }
    try {
        c.extremality = extremality_test(s, tol);
    } catch (const Error& e) {
        throw StageError("extremality", e.what());
    }
    const auto& ext = *c.extremality;
    if (ext.is_extremal && ext.rank >= 2) {
        c.verdict = Verdict::ExtremalEntangled;
        c.justification = "extremal PPT state of rank " + std::to_string(ext.rank) +
                          ": solution space is one-dimensional, extremal separable states are pure products";
        try {
            c.edge = edge_test(s, tol, opt);
        } catch (const Error& e) {
            throw StageError("edge", e.what());
        }
        return c;
    }
    try {
        c.edge = edge_test(s, tol, opt);
    } catch (const Error& e) {
        throw StageError("edge", e.what());
    }
    DecomposeOptions d = dopt;
    d.tol = tol;
    std::optional<GramDecomposition> g;
    try {
        g = decompose_gram(s, GramDecomposition::Form::A4, d);
    } catch (const Error& e) {
        throw StageError("decompose", e.what());
    }
    if (g && g->is_product_certificate) {
        c.decomposition = g;
        c.verdict = Verdict::SeparableByCertificate;
        c.justification = "explicit product decomposition with " + std::to_string(g->K) + " terms, error " +
                          std::to_string(g->reconstruction_error);
        return c;
    }
    if (c.three_rank.r == 5 && c.three_rank.r_ta == 7 && c.three_rank.r_tab == 7) {
        c.verdict = Verdict::Inconclusive;
        c.justification = "(5,7,7) without a certificate";
    }
    return c;
}

}  // namespace pptsym
