#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "evolvekit/metamodel.hpp"
#include "evolvekit/model.hpp"

namespace evolvekit {

using Json = nlohmann::json;

/// Parses and validates. PARSE_ERROR on malformed JSON or wrong field shapes,
/// METAMODEL_ILLFORMED / MODEL_ILLFORMED on violated invariants.
Metamodel load_metamodel(std::string_view document);
Model load_model(std::string_view document);

Metamodel metamodel_from_json(const Json& doc);
Model model_from_json(const Json& doc);

/// Canonical form: keys sorted, sibling lists sorted by id/name, two-space
/// indentation, trailing newline.
std::string save_metamodel(const Metamodel& mm);
std::string save_model(const Model& model);

Json metamodel_to_json(const Metamodel& mm);
Json model_to_json(const Model& model);

Json literal_to_json(const Literal& value);
Literal literal_from_json(const Json& value);

/// PARSE_ERROR with line/column on malformed JSON.
Json parse_json(std::string_view document);

/// Dump with the canonical formatting used by every document and report.
std::string canonical_dump(const Json& doc);

/// Reads a whole file; PARSE_ERROR if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace evolvekit
