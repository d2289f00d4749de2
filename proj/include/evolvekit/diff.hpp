#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evolvekit/io.hpp"
#include "evolvekit/model.hpp"

namespace evolvekit::diff {

struct MatchConfig {
    double alpha = 0.5;     // weight of neighbour similarity
    double theta = 0.6;     // acceptance threshold
    double epsilon = 1e-3;  // convergence bound on the largest score change
    int maxIter = 100;

    /// Throws TYPE_ERROR when a field is out of range.
    void validate() const;
};

struct MatchPair {
    std::string left;
    std::string right;
    double score = 0.0;
};

struct Matching {
    std::vector<MatchPair> pairs;  // sorted by left id
    MatchConfig config;
    int iterations = 0;

    std::optional<std::string> right_of(const std::string& leftId) const;
    std::optional<std::string> left_of(const std::string& rightId) const;
};

/// 1 - levenshtein(a, b) / max(|a|, |b|); 1 for two empty strings.
double string_similarity(const std::string& a, const std::string& b);

/// Mean per-attribute similarity over the union of attribute names. Objects
/// without attributes on either side score 1.
double attribute_similarity(const MObject& a, const MObject& b);

/// Fixed-point similarity matching. METAMODEL_MISMATCH if the models name
/// different metamodels.
Matching match_models(const Model& left, const Model& right, const MatchConfig& cfg = {});

/// Pairs objects that share an id and a class, score 1. For id-stable inputs.
Matching match_by_id(const Model& left, const Model& right);

struct AttrChange {
    std::string leftId;
    std::string rightId;
    std::string attr;
    std::optional<Literal> oldValue;
    std::optional<Literal> newValue;
};

struct Move {
    std::string leftId;
    std::string rightId;
    std::string oldParent;  // empty when the object was a root
    std::string newParent;
    std::string oldRole;
    std::string newRole;
};

struct DiffReport {
    std::vector<std::string> added;    // right-only object ids
    std::vector<std::string> removed;  // left-only object ids
    std::vector<AttrChange> changed;
    std::vector<Move> moved;
    std::vector<std::string> linkAdded;    // right link ids
    std::vector<std::string> linkRemoved;  // left link ids

    bool empty() const;
};

DiffReport diff_models(const Model& left, const Model& right, const Matching& matching);

std::string render_diff_text(const DiffReport& report);
Json diff_to_json(const DiffReport& report);

enum class ConflictKind { AttrAttr, DeleteChange, MoveMove };
std::string_view to_string(ConflictKind kind) noexcept;

struct Conflict {
    ConflictKind kind;
    std::string baseId;
    std::string detail;
};

struct MergeResult {
    Model merged;
    std::vector<Conflict> conflicts;  // sorted by base id, kind, detail
};

/// Three-way merge. Conflicting changes keep the base state and are reported.
MergeResult merge3(const Model& base, const Model& left, const Model& right,
                   const MatchConfig& cfg = {});

std::string render_merge_text(const MergeResult& result);
Json merge_to_json(const MergeResult& result);

}  // namespace evolvekit::diff
