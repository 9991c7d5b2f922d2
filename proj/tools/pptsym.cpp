#include "pptsym/classify.hpp"
#include "pptsym/construct.hpp"
#include "pptsym/errors.hpp"
#include "pptsym/extremal.hpp"
#include "pptsym/hilbert.hpp"
#include "pptsym/horodecki.hpp"
#include "pptsym/state_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace pptsym;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct VerificationFailure : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Accepts decimals, p/q, sqrt(x) and compositions such as 1/sqrt(2).
double parse_real(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) throw UsageError("empty number");
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (s[i] == '/' && depth == 0) {
            double den = parse_real(s.substr(i + 1));
            if (den == 0.0) throw UsageError("division by zero in '" + raw + "'");
            return parse_real(s.substr(0, i)) / den;
        }
    }
    if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') {
        double v = parse_real(s.substr(5, s.size() - 6));
        if (v < 0) throw UsageError("sqrt of a negative number");
        return std::sqrt(v);
    }
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + raw + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw UsageError("not a number: '" + raw + "'");
    return v;
}

struct ToleranceFlags {
    std::optional<double> rank_rel_tol, psd_tol, hermitian_tol, residual_tol;
    std::string config;
};

void add_tolerance_flags(CLI::App* app, ToleranceFlags& f) {
    app->add_option("--rank-rel-tol", f.rank_rel_tol, "relative eigenvalue cut for ranks");
    app->add_option("--psd-tol", f.psd_tol, "PSD/PPT tolerance on eigenvalues");
    app->add_option("--hermitian-tol", f.hermitian_tol, "Hermiticity tolerance");
    app->add_option("--residual-tol", f.residual_tol, "range-membership tolerance");
    app->add_option("--config", f.config, "key=value file with tolerance overrides")->check(CLI::ExistingFile);
}

// Defaults, then environment, then config file, then flags.
Tolerances effective_tolerances(const ToleranceFlags& f) {
    Tolerances t = Tolerances::from_env();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw UsageError(f.config + ":" + std::to_string(lineno) + ": expected key=value");
            std::string key = trim(line.substr(0, eq));
            std::replace(key.begin(), key.end(), '-', '_');
            double v = parse_real(line.substr(eq + 1));
            if (key == "rank_rel_tol")
                t.rank_rel_tol = v;
            else if (key == "psd_tol")
                t.psd_tol = v;
            else if (key == "hermitian_tol")
                t.hermitian_tol = v;
            else if (key == "residual_tol")
                t.residual_tol = v;
            else
                throw UsageError(f.config + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (f.rank_rel_tol) t.rank_rel_tol = *f.rank_rel_tol;
    if (f.psd_tol) t.psd_tol = *f.psd_tol;
    if (f.hermitian_tol) t.hermitian_tol = *f.hermitian_tol;
    if (f.residual_tol) t.residual_tol = *f.residual_tol;
    try {
        t.validate();
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
    return t;
}

json provenance(const std::string& command, json config, std::optional<std::uint64_t> seed) {
    json p;
    p["command"] = command;
    p["config"] = std::move(config);
    p["seed"] = seed ? json(*seed) : json(nullptr);
    return p;
}

json state_metadata(const ThreeRank& tr, json prov, const Tolerances& tol, json certificates) {
    json m;
    m["three_rank"] = to_json(tr);
    m["provenance"] = std::move(prov);
    m["tolerances"] = to_json(tol);
    m["certificates"] = std::move(certificates);
    return m;
}

void ensure_parent(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string rank_key(const std::vector<int>& r) {
    std::string s;
    for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + std::to_string(r[i]);
    return s;
}

// ---------------------------------------------------------------- horodecki

json horodecki_certificates(const HorodeckiParams& p, const CMat& m, const Tolerances& tol) {
    const CMat pt = qubit_partial_transpose(m, p.d);
    json c;
    c["ppt"] = {{"min_eigenvalue", min_eigenvalue(m)}, {"min_pt_eigenvalue", min_eigenvalue(pt)}};
    c["ranks"] = json::array({rank_profile(m, tol).rank, rank_profile(pt, tol).rank});
    auto cls = classify_horodecki(p);
    c["classification"] = {{"verdict", cls.verdict == HorodeckiVerdict::Entangled ? "entangled" : "separable"},
                           {"reason", cls.reason}};
    return c;
}

int cmd_horodecki(int d, double b, const std::string& out, const Tolerances& tol, json& log) {
    HorodeckiParams p{d, b};
    p.validate();
    auto s = rho_db(p);
    StateFile f;
    f.num_qubits = 1;
    f.basis = "qubit-qudit";
    f.qudit_dim = d;
    f.matrix = s.matrix;
    json certs = horodecki_certificates(p, s.matrix, tol);
    json notes = json::array();
    if (b == 0.0) notes.push_back("b = 0: pure separable state");
    if (b == 1.0) notes.push_back("b = 1: separable, explicit product mixture");
    f.metadata["ranks"] = certs["ranks"];
    f.metadata["provenance"] = provenance("horodecki", {{"d", d}, {"b", b}}, std::nullopt);
    f.metadata["tolerances"] = to_json(tol);
    f.metadata["certificates"] = certs;
    f.metadata["notes"] = notes;
    ensure_parent(out);
    write_state_file(out, f);
    log["stage"] = "horodecki";
    log["three_rank"] = certs["ranks"];
    log["residuals"] = certs["ppt"];
    log["outcome"] = certs["classification"]["verdict"];
    print(f.metadata);
    return kExitOk;
}

// ---------------------------------------------------------------- construct

struct ConstructFlags {
    int d = 5, dprime = 4;
    std::string b = "1/2", gamma1 = "1/sqrt(2)", gamma2 = "sqrt(2)";
    std::vector<std::string> gammas;
    std::string lambda = "auto";
    std::string subtract = "on";
    std::string convention = "trace-bare";
    std::vector<std::string> alpha_re{"7"};
    std::uint64_t seed = 1;
    std::string out = "construct_out";
};

json certify_json(const SymmetricState& s, const Tolerances& tol) {
    auto c = certify(s, tol);
    json j;
    j["verdict"] = to_string(c.verdict);
    if (c.extremality) j["extremality"] = {{"solution_dim", c.extremality->solution_dim},
                                           {"is_extremal", c.extremality->is_extremal}};
    if (c.edge) j["edge_test"] = {{"case_tag", c.edge->case_tag},
                                  {"is_edge_counterexample", c.edge->is_edge_counterexample}};
    if (c.decomposition) j["decomposition"] = to_json(*c.decomposition);
    return j;
}

int cmd_construct(const ConstructFlags& cf, const Tolerances& tol, json& log) {
    PipelineConfig cfg;
    cfg.d = cf.d;
    cfg.dprime = cf.dprime;
    cfg.b = parse_real(cf.b);
    if (!cf.gammas.empty()) {
        cfg.gammas.clear();
        for (const auto& g : cf.gammas) cfg.gammas.emplace_back(parse_real(g));
    } else {
        cfg.gammas = {parse_real(cf.gamma1), parse_real(cf.gamma2)};
    }
    if (cf.lambda == "auto") {
        cfg.lambda_auto = true;
    } else {
        cfg.lambda_auto = false;
        cfg.lambda_value = parse_real(cf.lambda);
    }
    cfg.subtract = cf.subtract == "on";
    if (cf.convention == "unnormalized-bare") {
        cfg.omega_scale = OmegaScale::Unnormalized;
        cfg.projector_scale = ProjectorScale::Bare;
    } else if (cf.convention == "unnormalized-normalized") {
        cfg.omega_scale = OmegaScale::Unnormalized;
        cfg.projector_scale = ProjectorScale::Normalized;
    } else if (cf.convention == "trace-bare") {
        cfg.omega_scale = OmegaScale::TraceNormalized;
        cfg.projector_scale = ProjectorScale::Bare;
    } else {
        cfg.omega_scale = OmegaScale::TraceNormalized;
        cfg.projector_scale = ProjectorScale::Normalized;
    }
    cfg.alpha_re.clear();
    for (const auto& a : cf.alpha_re) cfg.alpha_re.push_back(parse_real(a));
    cfg.seed = cf.seed;
    cfg.tol = tol;

    json config = {{"d", cfg.d},
                   {"dprime", cfg.dprime},
                   {"b", cfg.b},
                   {"gammas", json::array()},
                   {"lambda", cf.lambda},
                   {"subtract", cf.subtract},
                   {"convention", cf.convention},
                   {"alpha_re", cfg.alpha_re}};
    for (const auto& g : cfg.gammas) config["gammas"].push_back(g.real());
    log["stage"] = "construct";

    PipelineResult res = run_pipeline(cfg);
    json prov = provenance("construct", config, cfg.seed);

    const fs::path dir(cf.out);
    fs::create_directories(dir / "states");
    auto save = [&](const std::string& name, const SymmetricState& s, json certs) {
        auto tr = s.num_qubits() == 4 ? three_rank(s, tol) : ThreeRank{};
        json meta = state_metadata(tr, prov, tol, std::move(certs));
        meta["stage"] = name;
        if (s.num_qubits() != 4) meta["pt_ranks"] = pt_ranks(s, tol);
        write_state_file((dir / "states" / (name + ".json")).string(), make_state_file(s, meta));
    };
    save("omega", res.omega, json::object());
    save("lifted", res.lifted, {{"lambda_star", res.lambda_star}});
    json final_certs = json::object();
    final_certs["ppt"] = {{"min_pt_eigenvalue", res.final_min_pt_eigenvalue}};
    if (res.extremality)
        final_certs["extremality"] = {{"solution_dim", res.extremality->solution_dim},
                                      {"is_extremal", res.extremality->is_extremal}};
    if (res.edge)
        final_certs["edge_test"] = {{"case_tag", res.edge->case_tag},
                                    {"is_edge_counterexample", res.edge->is_edge_counterexample}};
    if (res.final_state.num_qubits() == 4) final_certs["classification"] = {{"verdict", certify_json(res.final_state, tol)["verdict"]}};
    save("final", res.final_state, final_certs);

    json report = to_json(res);
    report["provenance"] = prov;
    if (res.final_state.num_qubits() == 4) report["final_three_rank"] = to_json(three_rank(res.final_state, tol));
    if (final_certs.contains("classification")) report["final_verdict"] = final_certs["classification"]["verdict"];
    {
        std::ofstream out(dir / "summary.json");
        out << report.dump(2) << "\n";
    }
    log["three_rank"] = res.stages.back().ranks;
    log["residuals"] = {{"final_min_pt_eigenvalue", res.final_min_pt_eigenvalue}};
    log["outcome"] = report.value("final_verdict", json("completed"));
    print(report);
    return kExitOk;
}

// ---------------------------------------------------------------- search

struct SearchFlags {
    int runs = 10;
    std::uint64_t seed = 1;
    std::string start = "maximally-mixed-symmetric";
    std::string out_dir = "search_out";
    int max_steps = 60;
};

int cmd_search(const SearchFlags& sf, const Tolerances& tol, const std::string& log_path) {
    SearchConfig cfg;
    cfg.tol = tol;
    cfg.max_steps = sf.max_steps;
    if (sf.start != "maximally-mixed-symmetric") cfg.start = load_symmetric_state(read_state_file(sf.start), tol);
    json config = {{"runs", sf.runs}, {"start", sf.start == "maximally-mixed-symmetric" ? sf.start : "file"},
                   {"max_steps", sf.max_steps}};
    if (sf.start != "maximally-mixed-symmetric") config["start_matrix"] = matrix_to_json(cfg.start.matrix());

    const fs::path dir(sf.out_dir);
    fs::create_directories(dir / "states");

    std::map<std::string, int> tally;
    std::map<std::string, int> entangled_ranks;
    std::set<std::string> seen;
    int completed = 0, entangled = 0, unique = 0, visited_577 = 0, certified_577 = 0;
    json failures = json::array();
    DecomposeOptions dopt;
    dopt.tol = tol;

    for (int i = 0; i < sf.runs; ++i) {
        const std::uint64_t run_seed = splitmix64(sf.seed * 0x100000001B3ULL + static_cast<std::uint64_t>(i));
        json rec = {{"command", "search"}, {"seed", run_seed}, {"stage", "search-run"}, {"run", i}};
        try {
            WalkTrace tr = extremal_search(run_seed, cfg);
            std::vector<int> ranks = pt_ranks(tr.terminal, tol);
            if (!tr.completed) {
                failures.push_back({{"run", i}, {"status", tr.status}});
                rec["three_rank"] = ranks;
                rec["outcome"] = "incomplete: " + tr.status;
                append_run_log(log_path, rec);
                continue;
            }
            ++completed;
            ++tally[rank_key(ranks)];
            for (const auto& st : tr.steps) {
                if (st.ranks_after != std::vector<int>{5, 7, 7}) continue;
                ++visited_577;
                auto g = decompose_gram(st.state, GramDecomposition::Form::A4, dopt);
                if (g && g->is_product_certificate) ++certified_577;
            }
            std::string outcome = tr.terminal_report.entangled_by_extremality ? "extremal-entangled" : "extremal-separable";
            if (tr.terminal_report.entangled_by_extremality) {
                ++entangled;
                ++entangled_ranks[rank_key(ranks)];
                std::string key = fingerprint_key(spectral_fingerprint(tr.terminal));
                if (seen.insert(key).second) {
                    ++unique;
                    json certs = {{"extremality",
                                   {{"solution_dim", tr.terminal_report.solution_dim},
                                    {"is_extremal", tr.terminal_report.is_extremal}}}};
                    json prov = provenance("search", config, sf.seed);
                    prov["run"] = i;
                    prov["run_seed"] = run_seed;
                    json meta = state_metadata(three_rank(tr.terminal, tol), prov, tol, certs);
                    std::ostringstream name;
                    name << "extremal_" << std::setw(4) << std::setfill('0') << i << ".json";
                    write_state_file((dir / "states" / name.str()).string(), make_state_file(tr.terminal, meta));
                } else {
                    outcome += " (duplicate)";
                }
            }
            rec["three_rank"] = ranks;
            rec["residuals"] = {{"max_equation_residual", tr.terminal_report.max_equation_residual}};
            rec["outcome"] = outcome;
        } catch (const Error& e) {
            failures.push_back({{"run", i}, {"status", e.what()}});
            rec["outcome"] = std::string("error: ") + e.what();
        }
        append_run_log(log_path, rec);
    }

    bool all_578 = true;
    for (const auto& [k, n] : entangled_ranks) all_578 = all_578 && k == "5,7,8";
    json summary;
    summary["provenance"] = provenance("search", config, sf.seed);
    summary["runs"] = sf.runs;
    summary["completed"] = completed;
    summary["terminal_tally"] = tally;
    summary["entangled_terminals"] = entangled;
    summary["unique_entangled"] = unique;
    summary["entangled_three_ranks"] = entangled_ranks;
    summary["all_entangled_have_578"] = all_578;
    summary["visited_577"] = visited_577;
    summary["certified_577"] = certified_577;
    summary["flagged_577"] = visited_577 - certified_577;
    summary["failures"] = failures;
    {
        std::ofstream out(dir / "summary.json");
        out << summary.dump(2) << "\n";
    }
    print(summary);
    return kExitOk;
}

// ---------------------------------------------------------------- single-state commands

SymmetricState load_state(const std::string& in, const Tolerances& tol) {
    return load_symmetric_state(read_state_file(in), tol);
}

int cmd_test_extremal(const std::string& in, const Tolerances& tol, json& log) {
    auto s = load_state(in, tol);
    auto rep = extremality_test(s, tol);
    json j = to_json(rep);
    j["counting_bound"] = {};
    if (s.num_qubits() == 4) {
        auto cb = counting_bound(rep.pt_ranks, CountingSpace::Symmetric4);
        j["counting_bound"] = {{"not_extremal", cb.not_extremal}, {"lhs", cb.lhs}, {"threshold", cb.threshold}};
    }
    log["stage"] = "test-extremal";
    log["three_rank"] = rep.pt_ranks;
    log["residuals"] = {{"max_equation_residual", rep.max_equation_residual}};
    log["outcome"] = rep.is_extremal ? "extremal" : "not-extremal";
    print(j);
    return kExitOk;
}

int cmd_classify(const std::string& in, const std::string& out, const Tolerances& tol, json& log) {
    StateFile f = read_state_file(in);
    auto s = load_symmetric_state(f, tol);
    auto c = certify(s, tol);
    json j = to_json(c);
    if (!out.empty()) {
        json certs = f.metadata.value("certificates", json::object());
        certs["classification"] = {{"verdict", to_string(c.verdict)}};
        if (c.decomposition) certs["decomposition"] = to_json(*c.decomposition);
        if (c.extremality)
            certs["extremality"] = {{"solution_dim", c.extremality->solution_dim},
                                    {"is_extremal", c.extremality->is_extremal}};
        json meta = state_metadata(c.three_rank, provenance("classify", json::object(), std::nullopt), tol, certs);
        ensure_parent(out);
        write_state_file(out, make_state_file(s, meta));
    }
    log["stage"] = "classify";
    log["three_rank"] = to_json(c.three_rank);
    log["outcome"] = to_string(c.verdict);
    print(j);
    return kExitOk;
}

int cmd_decompose(const std::string& in, const std::string& form, const std::string& out, std::uint64_t seed,
                  const Tolerances& tol, json& log) {
    StateFile f = read_state_file(in);
    auto s = load_symmetric_state(f, tol);
    DecomposeOptions opt;
    opt.seed = seed;
    opt.tol = tol;
    auto g = decompose_gram(s, form == "A3" ? GramDecomposition::Form::A3 : GramDecomposition::Form::A4, opt);
    log["stage"] = "decompose";
    log["three_rank"] = to_json(three_rank(s, tol));
    if (!g) {
        log["outcome"] = "no-decomposition";
        print({{"found", false}, {"form", form}});
        return kExitFailure;
    }
    json j = to_json(*g);
    log["residuals"] = {{"reconstruction_error", g->reconstruction_error}};
    log["outcome"] = g->is_product_certificate ? "separable-certificate" : "decomposition";
    if (!out.empty()) {
        json certs = f.metadata.value("certificates", json::object());
        certs["decomposition"] = j;
        json meta = state_metadata(three_rank(s, tol), provenance("decompose", {{"form", form}}, seed), tol, certs);
        ensure_parent(out);
        write_state_file(out, make_state_file(s, meta));
    }
    print(j);
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct Checks {
    json list = json::array();
    bool ok = true;
    void add(const std::string& name, const json& stored, const json& recomputed, bool pass) {
        list.push_back({{"check", name}, {"stored", stored}, {"recomputed", recomputed}, {"ok", pass}});
        ok = ok && pass;
    }
};

void verify_horodecki(const StateFile& f, const Tolerances& tol, Checks& ch) {
    const json& meta = f.metadata;
    const json& cfg = meta.at("provenance").at("config");
    HorodeckiParams p{cfg.at("d").get<int>(), cfg.at("b").get<double>()};
    p.validate();
    const double dev = (f.matrix - rho_db(p).matrix).norm();
    ch.add("matrix_matches_parameters", 0.0, dev, dev <= 1e-12);
    json c = horodecki_certificates(p, f.matrix, tol);
    const json& stored = meta.value("certificates", json::object());
    bool ppt = c["ppt"]["min_eigenvalue"].get<double>() >= -tol.psd_tol &&
               c["ppt"]["min_pt_eigenvalue"].get<double>() >= -tol.psd_tol;
    ch.add("ppt", true, ppt, ppt);
    if (stored.contains("ranks")) ch.add("ranks", stored["ranks"], c["ranks"], stored["ranks"] == c["ranks"]);
    if (stored.contains("classification"))
        ch.add("classification", stored["classification"]["verdict"], c["classification"]["verdict"],
               stored["classification"]["verdict"] == c["classification"]["verdict"]);
}

void verify_symmetric(const StateFile& f, const Tolerances& tol, Checks& ch) {
    SymmetricState s;
    try {
        s = load_symmetric_state(f, tol);
    } catch (const Error& e) {
        ch.add("valid_state", true, e.what(), false);
        return;
    }
    const json& meta = f.metadata;
    const json certs = meta.value("certificates", json::object());
    const bool ppt = is_ppt(s, tol);
    ch.add("ppt", true, ppt, ppt);
    if (s.num_qubits() == 4 && meta.contains("three_rank") && !meta["three_rank"].is_null()) {
        json tr = to_json(three_rank(s, tol));
        ch.add("three_rank", meta["three_rank"], tr, meta["three_rank"] == tr);
    } else if (meta.contains("pt_ranks")) {
        json r = pt_ranks(s, tol);
        ch.add("pt_ranks", meta["pt_ranks"], r, meta["pt_ranks"] == r);
    }
    if (!ppt) return;
    if (certs.contains("extremality")) {
        auto rep = extremality_test(s, tol);
        ch.add("extremality.solution_dim", certs["extremality"]["solution_dim"], rep.solution_dim,
               certs["extremality"]["solution_dim"].get<int>() == rep.solution_dim);
    }
    if (certs.contains("edge_test") && s.num_qubits() == 4) {
        auto rep = edge_test(s, tol);
        ch.add("edge_test.is_edge_counterexample", certs["edge_test"]["is_edge_counterexample"],
               rep.is_edge_counterexample,
               certs["edge_test"]["is_edge_counterexample"].get<bool>() == rep.is_edge_counterexample);
    }
    if (certs.contains("decomposition")) {
        GramDecomposition g = decomposition_from_json(certs["decomposition"]);
        DecomposeOptions dopt;
        const double err = (g.reconstruct() - s.matrix()).norm();
        const double bound = dopt.certificate_tol * std::max(1.0, s.matrix().norm());
        ch.add("decomposition.reconstruction", g.reconstruction_error, err, err <= bound);
        bool product = true;
        for (const auto& b : g.B) product = product && b == cplx(0.0);
        ch.add("decomposition.is_product_certificate", g.is_product_certificate, product,
               g.is_product_certificate == product);
    }
    if (certs.contains("classification") && s.num_qubits() == 4) {
        auto c = certify(s, tol);
        const std::string stored = certs["classification"]["verdict"].get<std::string>();
        ch.add("classification.verdict", stored, to_string(c.verdict), stored == to_string(c.verdict));
    }
}

int cmd_verify(const std::string& in, const Tolerances& tol, json& log) {
    StateFile f = read_state_file(in);
    Checks ch;
    try {
        if (f.basis == "qubit-qudit")
            verify_horodecki(f, tol, ch);
        else
            verify_symmetric(f, tol, ch);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed metadata: ") + e.what());
    }
    log["stage"] = "verify";
    log["three_rank"] = f.metadata.contains("three_rank") ? f.metadata["three_rank"] : f.metadata.value("ranks", json());
    log["outcome"] = ch.ok ? "verified" : "certificate-mismatch";
    print({{"verified", ch.ok}, {"checks", ch.list}});
    if (!ch.ok) throw VerificationFailure("certificate mismatch");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPT symmetric multi-qubit states: construction, extremal search and classification"};
    app.require_subcommand(1);
    std::string log_path;
    app.add_option("--log", log_path, "run-log file (default: <out-dir>/runs.jsonl or ./runs.jsonl)");

    ToleranceFlags tf;

    auto* horo = app.add_subcommand("horodecki", "write the 2 x d PPT family state");
    int h_d = 4;
    double h_b = 0.5;
    std::string h_out;
    horo->add_option("--d", h_d, "qudit dimension")->check(CLI::Range(2, 16));
    horo->add_option("--b", h_b, "family parameter in [0,1]")->check(CLI::Range(0.0, 1.0));
    horo->add_option("--out", h_out, "output state file")->required();
    add_tolerance_flags(horo, tf);

    auto* cons = app.add_subcommand("construct", "filter, lift and subtract to an extremal state");
    ConstructFlags cf;
    cons->add_option("--d", cf.d, "qudit dimension")->check(CLI::Range(3, 13));
    cons->add_option("--dprime", cf.dprime, "reduced dimension (number of qubits)")->check(CLI::Range(2, 12));
    cons->add_option("--b", cf.b, "family parameter, e.g. 1/2");
    cons->add_option("--gamma1", cf.gamma1, "first F2 entry");
    cons->add_option("--gamma2", cf.gamma2, "second F2 entry");
    cons->add_option("--gammas", cf.gammas, "all d-d'+1 F2 entries (overrides gamma1/gamma2)");
    cons->add_option("--lambda", cf.lambda, "auto or a fixed value");
    cons->add_option("--subtract", cf.subtract, "on|off")->check(CLI::IsMember({"on", "off"}));
    cons->add_option("--convention", cf.convention, "omega and projector scaling")
        ->check(CLI::IsMember({"unnormalized-bare", "unnormalized-normalized", "trace-bare", "trace-normalized"}));
    cons->add_option("--alpha-re", cf.alpha_re, "Re(alpha) slices for the (5,8,8) curve");
    cons->add_option("--seed", cf.seed, "seed");
    cons->add_option("--out", cf.out, "output directory");
    add_tolerance_flags(cons, tf);

    auto* srch = app.add_subcommand("search", "seeded extremal-point search");
    SearchFlags sf;
    srch->add_option("--runs", sf.runs, "number of runs")->check(CLI::NonNegativeNumber);
    srch->add_option("--seed", sf.seed, "base seed");
    srch->add_option("--start", sf.start, "maximally-mixed-symmetric or a state file");
    srch->add_option("--out-dir", sf.out_dir, "output directory");
    srch->add_option("--max-steps", sf.max_steps, "walk length cap")->check(CLI::PositiveNumber);
    add_tolerance_flags(srch, tf);

    std::string in, out, form = "A4";
    std::uint64_t dseed = 12345;
    auto* text = app.add_subcommand("test-extremal", "solution-space dimension of the fixed-point system");
    text->add_option("--in", in, "state file")->required();
    add_tolerance_flags(text, tf);
    auto* cls = app.add_subcommand("classify", "three-rank verdict with certificates");
    cls->add_option("--in", in, "state file")->required();
    cls->add_option("--out", out, "write the state with its classification certificate");
    add_tolerance_flags(cls, tf);
    auto* dec = app.add_subcommand("decompose", "Gram-form decomposition of a four-qubit state");
    dec->add_option("--in", in, "state file")->required();
    dec->add_option("--form", form, "A3 or A4")->check(CLI::IsMember({"A3", "A4"}));
    dec->add_option("--out", out, "write the state with the decomposition certificate");
    dec->add_option("--seed", dseed, "multistart seed");
    add_tolerance_flags(dec, tf);
    auto* ver = app.add_subcommand("verify", "recompute every stored certificate");
    ver->add_option("--in", in, "state file")->required();
    add_tolerance_flags(ver, tf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    std::string name = app.get_subcommands().front()->get_name();
    if (log_path.empty()) {
        fs::path base;
        if (name == "construct")
            base = cf.out;
        else if (name == "search")
            base = sf.out_dir;
        else if (name == "horodecki" && fs::path(h_out).has_parent_path())
            base = fs::path(h_out).parent_path();
        log_path = (base / "runs.jsonl").string();
    }

    json log = {{"command", name}, {"seed", nullptr}};
    int code = kExitOk;
    try {
        Tolerances tol = effective_tolerances(tf);
        if (name != "search" && fs::path(log_path).has_parent_path()) fs::create_directories(fs::path(log_path).parent_path());
        if (name == "horodecki") {
            code = cmd_horodecki(h_d, h_b, h_out, tol, log);
        } else if (name == "construct") {
            log["seed"] = cf.seed;
            code = cmd_construct(cf, tol, log);
        } else if (name == "search") {
            fs::create_directories(sf.out_dir);
            log["seed"] = sf.seed;
            code = cmd_search(sf, tol, log_path);
            log["stage"] = "search-summary";
            log["outcome"] = "completed";
        } else if (name == "test-extremal") {
            code = cmd_test_extremal(in, tol, log);
        } else if (name == "classify") {
            code = cmd_classify(in, out, tol, log);
        } else if (name == "decompose") {
            log["seed"] = dseed;
            code = cmd_decompose(in, form, out, dseed, tol, log);
        } else if (name == "verify") {
            code = cmd_verify(in, tol, log);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        log["outcome"] = std::string("parse error: ") + e.what();
        code = kExitUsage;
    } catch (const VerificationFailure& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        code = kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        log["outcome"] = std::string("error: ") + e.what();
        code = kExitFailure;
    }
    try {
        append_run_log(log_path, log);
    } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }
    return code;
}
