#include "pptsym/classify.hpp"
#include "pptsym/errors.hpp"

namespace pptsym {

namespace {
const std::pair<Verdict, const char*> kNames[] = {
    {Verdict::SeparableByTheorem, "SeparableByTheorem"},
    {Verdict::SeparableByCertificate, "SeparableByCertificate"},
    {Verdict::GenericallySeparable, "GenericallySeparable"},
    {Verdict::GenericallyNotEdge, "GenericallyNotEdge"},
    {Verdict::NotEdgeProven, "NotEdgeProven"},
    {Verdict::EdgeCandidate, "EdgeCandidate"},
    {Verdict::ExtremalEntangled, "ExtremalEntangled"},
    {Verdict::Inconclusive, "Inconclusive"},
};
}

std::string to_string(Verdict v) {
    for (auto& [k, n] : kNames)
        if (k == v) return n;
    return "Inconclusive";
}

Verdict verdict_from_string(const std::string& s) {
    for (auto& [k, n] : kNames)
        if (s == n) return k;
    throw PreconditionError("unknown verdict '" + s + "'");
}

Classification classify_by_ranks(const ThreeRank& tr) {
    if (tr.r < 1 || tr.r > 5 || tr.r_ta < 1 || tr.r_ta > 8 || tr.r_tab < 1 || tr.r_tab > 9)
        throw PreconditionError("three-rank outside the (5,8,9) bounds");
    Classification c;
    c.three_rank = tr;
    auto set = [&](Verdict v, const char* why) {
        c.verdict = c.rank_verdict = v;
        c.justification = why;
        return c;
    };
    if (tr.r <= 4 || tr.r_ta <= 4 || tr.r_tab <= 3)
        return set(Verdict::SeparableByTheorem, "rank rule: r<=4 or r_TA<=4 or r_TAB<=3 implies separable");
    if (tr.r_ta <= 6 || tr.r_tab <= 6)
        return set(Verdict::GenericallySeparable, "rank rule: r_TA<=6 or r_TAB<=6, generic states separable");
    if (tr.r_ta == 8 && tr.r_tab == 8)
        return set(Verdict::NotEdgeProven, "(5,8,8): a product vector always exists, never edge");
    if (tr.r_ta == 7 && (tr.r_tab == 7 || tr.r_tab == 8))
        return set(Verdict::EdgeCandidate, "(5,7,7)/(5,7,8): not excluded by the edge rules");
    return set(Verdict::GenericallyNotEdge, "(5,7,9)/(5,8,7)/(5,8,9): generic states are not edge");
}

}  // namespace pptsym
