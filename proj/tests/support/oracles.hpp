#pragma once

// Reference implementations the library is checked against. None of them
// call into the code under test beyond the plain data types.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "generators.hpp"

namespace evolvekit::testing {

/// Absolute path of a file under tests/corpus.
std::string corpus_path(const std::string& name);
std::string read_corpus(const std::string& name);

// --- constraints over tests/corpus/oracle.mm.json --------------------------

/// Conformant Oracle model: nested components, ports with clashing names and
/// widths around the 1..8 range, random wires. At most `maxObjects` objects.
Model random_oracle_model(Rng& rng, int maxObjects = 30);

/// constraint name -> falsifying bindings (ids in quantifier order), sorted.
using Counterexamples = std::map<std::string, std::vector<std::vector<std::string>>>;

/// Exhaustive enumeration of oracle.constraints, written out as plain loops.
Counterexamples brute_force_counterexamples(const Model& m);

// --- diff -------------------------------------------------------------------

/// (id, attribute) pairs whose value differs between two id-stable models.
std::set<std::pair<std::string, std::string>> attribute_edits_by_id(const Model& a, const Model& b);

// --- merge ------------------------------------------------------------------

struct EditOp {
    enum class Kind { SetAttr, DeleteObject, AddObject, AddLink, RemoveLink };
    Kind kind;
    std::string id;      // object or link
    std::string attr;    // SetAttr
    Literal value;       // SetAttr
    MObject object;      // AddObject
    std::string parent;  // AddObject
    std::string role;    // AddObject
    MLink link;          // AddLink
};
using EditScript = std::vector<EditOp>;

Model apply_script(Model m, const EditScript& script);

/// Edits confined to `owned` objects (and links between them). String
/// attributes change by one character so similarity matching still pairs the
/// edited object with its base. A script either deletes or adds objects, never
/// both. New ids start with `prefix`.
EditScript random_script(const Model& base, const Metamodel& mm, const std::set<std::string>& owned,
                         const std::string& prefix, Rng& rng);

}  // namespace evolvekit::testing
