#include "pptsym/state_io.hpp"

#include "pptsym/errors.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pptsym {

json matrix_to_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

CMat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array of rows");
    const size_t n = j.size(), m = j[0].size();
    CMat out(n, m);
    for (size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != m) throw ParseError("ragged matrix rows");
        for (size_t k = 0; k < m; ++k) {
            const json& e = j[i][k];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError("matrix entries must be [re, im] pairs");
            out(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    if (!out.allFinite()) throw ParseError("matrix entries must be finite");
    return out;
}

std::string serialize(const StateFile& f) {
    json j;
    j["format_version"] = f.format_version;
    j["num_qubits"] = f.num_qubits;
    j["basis"] = f.basis;
    if (f.basis == "qubit-qudit") j["qudit_dim"] = f.qudit_dim;
    j["matrix"] = matrix_to_json(f.matrix);
    j["metadata"] = f.metadata;
    return j.dump(1) + "\n";
}

StateFile parse_state_file(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    StateFile f;
    try {
        f.format_version = j.at("format_version").get<std::string>();
        f.num_qubits = j.at("num_qubits").get<int>();
        f.basis = j.at("basis").get<std::string>();
        if (f.basis == "qubit-qudit") f.qudit_dim = j.at("qudit_dim").get<int>();
        f.matrix = matrix_from_json(j.at("matrix"));
        if (j.contains("metadata")) f.metadata = j["metadata"];
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed state file: ") + e.what());
    }
    if (f.format_version != "1") throw ParseError("unsupported format_version " + f.format_version);
    Eigen::Index expect = 0;
    if (f.basis == "dicke-orthonormal")
        expect = f.num_qubits >= 1 ? f.num_qubits + 1 : -1;
    else if (f.basis == "computational")
        expect = (f.num_qubits >= 1 && f.num_qubits <= kMaxQubits) ? (Eigen::Index(1) << f.num_qubits) : -1;
    else if (f.basis == "qubit-qudit")
        expect = 2 * f.qudit_dim;
    else
        throw ParseError("unknown basis '" + f.basis + "'");
    if (f.matrix.rows() != expect || f.matrix.cols() != expect)
        throw ParseError("matrix dimensions do not match num_qubits and basis");
    return f;
}

StateFile read_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_state_file(ss.str());
}

void write_state_file(const std::string& path, const StateFile& f) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << serialize(f);
}

StateFile make_state_file(const SymmetricState& s, json metadata) {
    StateFile f;
    f.num_qubits = s.num_qubits();
    f.matrix = s.matrix();
    f.metadata = std::move(metadata);
    return f;
}

SymmetricState load_symmetric_state(const StateFile& f, const Tolerances& tol) {
    if (f.basis == "dicke-orthonormal") return SymmetricState(f.num_qubits, f.matrix, tol);
    if (f.basis == "computational") return SymmetricState::from_computational(f.num_qubits, f.matrix, tol);
    throw PreconditionError("file does not hold a symmetric multi-qubit state");
}

json to_json(const Tolerances& t) {
    return {{"rank_rel_tol", t.rank_rel_tol},
            {"psd_tol", t.psd_tol},
            {"hermitian_tol", t.hermitian_tol},
            {"residual_tol", t.residual_tol}};
}

json to_json(const ThreeRank& t) { return json::array({t.r, t.r_ta, t.r_tab}); }

json to_json(const Alpha& a) {
    if (a.infinite) return "inf";
    return json::array({a.value.real(), a.value.imag()});
}

Alpha alpha_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return Alpha::infinity();
    if (j.is_array() && j.size() == 2) return Alpha::at(cplx(j[0].get<double>(), j[1].get<double>()));
    throw ParseError("alpha must be [re, im] or \"inf\"");
}

json to_json(const ExtremalityReport& r) {
    return {{"solution_dim", r.solution_dim},
            {"is_extremal", r.is_extremal},
            {"rank", r.rank},
            {"pt_ranks", r.pt_ranks},
            {"counting_bound_triggered", r.counting_bound_triggered},
            {"entangled_by_extremality", r.entangled_by_extremality},
            {"max_equation_residual", r.max_equation_residual},
            {"consistent", r.consistent}};
}

json to_json(const EdgeTestReport& r) {
    json found = json::array();
    for (const auto& f : r.found_vectors) found.push_back({{"alpha", to_json(f.alpha)}, {"range_residuals", f.range_residuals}});
    return {{"case_tag", r.case_tag},
            {"solver", r.solver},
            {"candidates", r.candidates},
            {"found_vectors", found},
            {"is_edge_counterexample", r.is_edge_counterexample},
            {"inconclusive", r.inconclusive},
            {"note", r.note}};
}

json to_json(const GramDecomposition& g) {
    json terms = json::array();
    for (size_t k = 0; k < g.alphas.size(); ++k)
        terms.push_back({{"alpha", to_json(g.alphas[k])},
                         {"A", json::array({g.A[k].real(), g.A[k].imag()})},
                         {"B", json::array({g.B[k].real(), g.B[k].imag()})}});
    return {{"form", g.form == GramDecomposition::Form::A3 ? "A3" : "A4"},
            {"K", g.K},
            {"method", g.method},
            {"terms", terms},
            {"reconstruction_error", g.reconstruction_error},
            {"is_product_certificate", g.is_product_certificate}};
}

GramDecomposition decomposition_from_json(const json& j) {
    GramDecomposition g;
    try {
        g.form = j.at("form").get<std::string>() == "A3" ? GramDecomposition::Form::A3 : GramDecomposition::Form::A4;
        g.K = j.at("K").get<int>();
        g.method = j.value("method", "");
        for (const auto& t : j.at("terms")) {
            g.alphas.push_back(alpha_from_json(t.at("alpha")));
            g.A.push_back(cplx(t.at("A")[0].get<double>(), t.at("A")[1].get<double>()));
            g.B.push_back(cplx(t.at("B")[0].get<double>(), t.at("B")[1].get<double>()));
        }
        g.reconstruction_error = j.value("reconstruction_error", 0.0);
        g.is_product_certificate = j.value("is_product_certificate", false);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed decomposition: ") + e.what());
    }
    return g;
}

json to_json(const Classification& c) {
    json j = {{"verdict", to_string(c.verdict)},
              {"rank_verdict", to_string(c.rank_verdict)},
              {"justification", c.justification},
              {"three_rank", to_json(c.three_rank)}};
    if (c.extremality) j["extremality"] = to_json(*c.extremality);
    if (c.edge) j["edge_test"] = to_json(*c.edge);
    if (c.decomposition) j["decomposition"] = to_json(*c.decomposition);
    return j;
}

json to_json(const PipelineResult& r) {
    json stages = json::array();
    for (const auto& s : r.stages) stages.push_back({{"stage", s.stage}, {"ranks", s.ranks}});
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back({{"alpha", to_json(c.alpha)}, {"range_residuals", c.range_residuals}});
    json j = {{"lambda_star", r.lambda_star},
              {"lambda_limiting_k", r.lambda_limiting_k},
              {"subtracted", r.subtracted},
              {"stages", stages},
              {"final_min_pt_eigenvalue", r.final_min_pt_eigenvalue},
              {"notes", r.notes}};
    if (r.subtracted) {
        j["subtraction_alpha"] = to_json(r.subtraction_alpha);
        j["mu_star"] = r.mu.mu;
        j["mu_limiting_k"] = r.mu.limiting_k;
        j["mu_per_k"] = r.mu.per_k;
        j["candidates"] = cands;
    }
    if (r.extremality) j["extremality"] = to_json(*r.extremality);
    if (r.edge) j["edge_test"] = to_json(*r.edge);
    return j;
}

void append_run_log(const std::string& path, json record) {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() % 1000000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(6) << std::setfill('0') << us << 'Z';
    json line;
    line["timestamp"] = ts.str();
    for (auto& [k, v] : record.items()) line[k] = v;
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot append to " + path);
    out << line.dump() << "\n";
}

}  // namespace pptsym
