#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvekit/io.hpp"
#include "evolvekit/mcl.hpp"
#include "evolvekit/metamodel.hpp"

namespace evolvekit::ummie {

/// Serialized class reference of a node whose class was deleted.
inline constexpr std::string_view kNullMarker = "!null";

enum class Side { Source, Destination };
enum class Action { Match, Create, Delete };

struct PatternNode {
    std::string id;
    Side side = Side::Source;
    std::string classRef;
    Action action = Action::Match;
    friend bool operator==(const PatternNode&, const PatternNode&) = default;
};

struct PatternEdge {
    std::string src;
    std::string dst;
    std::string label;
    friend bool operator==(const PatternEdge&, const PatternEdge&) = default;
};

struct AttrOp {
    std::string node;
    std::string attr;
    std::string expr;  // opaque apart from attribute-name tokens
    friend bool operator==(const AttrOp&, const AttrOp&) = default;
};

struct Rule {
    std::string name;
    std::vector<PatternNode> nodes;
    std::vector<PatternEdge> edges;
    std::vector<AttrOp> attrOps;
    friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleGraph {
    std::string name;
    std::vector<Rule> rules;

    /// Sorts rules by name and their parts by id so serialization is canonical.
    void normalize();
    friend bool operator==(const RuleGraph&, const RuleGraph&) = default;
};

/// RULEGRAPH_ILLFORMED unless node ids are unique per rule, edges and attrOps
/// name existing nodes, and every class reference resolves on its side.
void validate(const RuleGraph& rg, const Metamodel& src, const Metamodel& dst);

RuleGraph rulegraph_from_json(const Json& doc);
RuleGraph load_rulegraph(std::string_view document);
Json rulegraph_to_json(const RuleGraph& rg);
std::string save_rulegraph(const RuleGraph& rg);

enum class WarningCode { NullRef, AmbiguousMapping, AdditionUnhandled, AttrRefBroken };
std::string_view to_string(WarningCode code) noexcept;

struct Warning {
    WarningCode code;
    std::string ruleName;  // empty for report-level entries
    std::optional<std::string> nodeId;
    std::string message;
};

struct WarningReport {
    std::vector<Warning> entries;  // rule order, node order, then report-level entries
    std::size_t count(WarningCode code) const;
};

struct RuleMigration {
    RuleGraph rules;
    WarningReport warnings;
};

RuleMigration migrate_rules(const RuleGraph& rg, const mcl::MigrationSpec& spec, const Metamodel& src,
                            const Metamodel& evolved, const Metamodel& dst);

std::string render_warnings_text(const WarningReport& report);
Json warnings_to_json(const WarningReport& report);

}  // namespace evolvekit::ummie
