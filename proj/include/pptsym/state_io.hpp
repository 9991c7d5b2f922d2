#pragma once

#include "pptsym/classify.hpp"
#include "pptsym/errors.hpp"
#include "pptsym/construct.hpp"
#include "pptsym/extremal.hpp"
#include "pptsym/hilbert.hpp"

#include <json.hpp>
#include <string>

namespace pptsym {

using json = nlohmann::ordered_json;

struct ParseError : Error {
    using Error::Error;
};

struct StateFile {
    std::string format_version = "1";
    int num_qubits = 0;
    // "dicke-orthonormal", "computational", or "qubit-qudit" (C^2 (x) C^d)
    std::string basis = "dicke-orthonormal";
    int qudit_dim = 0;
    CMat matrix;
    json metadata = json::object();
};

json matrix_to_json(const CMat& m);
CMat matrix_from_json(const json& j);

std::string serialize(const StateFile& f);
StateFile parse_state_file(const std::string& text);
StateFile read_state_file(const std::string& path);
void write_state_file(const std::string& path, const StateFile& f);

StateFile make_state_file(const SymmetricState& s, json metadata = json::object());
// Converts computational-basis files onto the symmetric subspace.
SymmetricState load_symmetric_state(const StateFile& f, const Tolerances& tol = {});

json to_json(const Tolerances& t);
json to_json(const ThreeRank& t);
json to_json(const Alpha& a);
Alpha alpha_from_json(const json& j);
json to_json(const ExtremalityReport& r);
json to_json(const EdgeTestReport& r);
json to_json(const GramDecomposition& g);
GramDecomposition decomposition_from_json(const json& j);
json to_json(const Classification& c);
json to_json(const PipelineResult& r);

// Appends one JSON object per line with a UTC timestamp.
void append_run_log(const std::string& path, json record);

}  // namespace pptsym
