#pragma once

// Seeded random inputs for property tests and the acceptance suite.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evolvekit/metamodel.hpp"
#include "evolvekit/model.hpp"
#include "evolvekit/ummie.hpp"

namespace evolvekit::testing {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi);
bool coin(Rng& rng, double p = 0.5);
std::string random_word(Rng& rng, std::size_t minLen = 3, std::size_t maxLen = 8);
Literal random_value(const AttrType& type, Rng& rng);

/// Concrete classes that are `cls` or inherit from it, by name.
std::vector<std::string> concrete_subtypes(const Metamodel& mm, const std::string& cls);

/// Classes Root, K0..Kn with single inheritance, typed attributes, acyclic
/// containment by class index and a few associations. Every class K<i> owns a
/// required string attribute `n<i>`.
Metamodel random_metamodel(Rng& rng, const std::string& name = "Gen", const std::string& version = "v1");

/// A conformant instance with one Root object and at most `maxObjects` objects.
Model random_model(const Metamodel& mm, Rng& rng, std::size_t maxObjects);

/// What a generated delta does, recorded independently of its MCL text.
struct DeltaTruth {
    std::map<std::string, std::string> renamedClasses;
    std::set<std::string> deletedClasses;
    std::set<std::string> splitClasses;
    std::map<std::string, std::map<std::string, std::string>> renamedAttributes;  // class -> old -> new
    std::map<std::string, std::string> renamedAssociations;
    std::vector<std::string> additions;  // new classes, one add rule each
};

struct DeltaCase {
    Metamodel evolved;
    std::string text;
    DeltaTruth truth;
};

/// One to three class-level edits plus optional association rename and
/// defaulted attribute; the evolved metamodel has version "v2".
DeltaCase random_delta(const Metamodel& mm, Rng& rng);

/// Rules over `src` (source side) and `dst` (destination side).
ummie::RuleGraph random_rulegraph(const Metamodel& src, const Metamodel& dst, Rng& rng);

/// Component hierarchy over the built-in metamodel: at most `maxComponents`
/// components and `maxChannels` channels, all satisfying the locality rule.
Model random_components(Rng& rng, int maxComponents = 10, int maxChannels = 20);

/// (component, container) sibling pairs whose push-down cannot turn a leaf with
/// connected ports into a composite, which would change leaf connectivity.
std::vector<std::pair<std::string, std::string>> connectivity_safe_pushes(const Model& m);

/// Subcomponents whose pull-up keeps their container composite or whose
/// container has no connected ports.
std::vector<std::string> connectivity_safe_pulls(const Model& m);

/// Deterministic hierarchical statechart over events {a, b}.
Model random_statechart(Rng& rng, int maxStates = 15);

}  // namespace evolvekit::testing
