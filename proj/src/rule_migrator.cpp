#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "evolvekit/ummie.hpp"

namespace evolvekit::ummie {

void RuleGraph::normalize() {
    std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) { return a.name < b.name; });
    for (auto& r : rules) {
        std::sort(r.nodes.begin(), r.nodes.end(), [](const PatternNode& a, const PatternNode& b) { return a.id < b.id; });
        std::sort(r.edges.begin(), r.edges.end(), [](const PatternEdge& a, const PatternEdge& b) {
            return std::tie(a.src, a.dst, a.label) < std::tie(b.src, b.dst, b.label);
        });
        std::sort(r.attrOps.begin(), r.attrOps.end(), [](const AttrOp& a, const AttrOp& b) {
            return std::tie(a.node, a.attr, a.expr) < std::tie(b.node, b.attr, b.expr);
        });
    }
}

namespace {

[[noreturn]] void illformed(const std::string& what) { throw Error(ErrorCode::RuleGraphIllformed, what); }

std::string str(const Json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) illformed(ctx + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

const Json& arr(const Json& obj, const char* key, const std::string& ctx) {
    static const Json empty = Json::array();
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return empty;
    if (!it->is_array()) illformed(ctx + ": field '" + key + "' must be an array");
    return *it;
}

Side side_from(const std::string& s, const std::string& ctx) {
    if (s == "source") return Side::Source;
    if (s == "destination") return Side::Destination;
    illformed(ctx + ": side must be 'source' or 'destination'");
}

Action action_from(const std::string& s, const std::string& ctx) {
    if (s == "match") return Action::Match;
    if (s == "create") return Action::Create;
    if (s == "delete") return Action::Delete;
    illformed(ctx + ": action must be 'match', 'create' or 'delete'");
}

const char* side_name(Side s) { return s == Side::Source ? "source" : "destination"; }

const char* action_name(Action a) {
    switch (a) {
    case Action::Match: return "match";
    case Action::Create: return "create";
    case Action::Delete: return "delete";
    }
    return "match";
}

}  // namespace

RuleGraph rulegraph_from_json(const Json& doc) {
    if (!doc.is_object()) illformed("rule graph: expected an object");
    RuleGraph rg;
    rg.name = doc.contains("name") ? str(doc, "name", "rule graph") : "";
    for (const auto& jr : arr(doc, "rules", "rule graph")) {
        if (!jr.is_object()) illformed("rule graph: rules must be objects");
        Rule r;
        r.name = str(jr, "name", "rule");
        std::string ctx = "rule '" + r.name + "'";
        for (const auto& jn : arr(jr, "nodes", ctx)) {
            if (!jn.is_object()) illformed(ctx + ": nodes must be objects");
            PatternNode n;
            n.id = str(jn, "id", ctx);
            n.side = side_from(str(jn, "side", ctx), ctx);
            n.classRef = str(jn, "class", ctx);
            n.action = jn.contains("action") ? action_from(str(jn, "action", ctx), ctx) : Action::Match;
            r.nodes.push_back(std::move(n));
        }
        for (const auto& je : arr(jr, "edges", ctx)) {
            if (!je.is_object()) illformed(ctx + ": edges must be objects");
            r.edges.push_back({str(je, "src", ctx), str(je, "dst", ctx), je.contains("label") ? str(je, "label", ctx) : ""});
        }
        for (const auto& ja : arr(jr, "attrOps", ctx)) {
            if (!ja.is_object()) illformed(ctx + ": attrOps must be objects");
            r.attrOps.push_back({str(ja, "node", ctx), str(ja, "attr", ctx), str(ja, "expr", ctx)});
        }
        rg.rules.push_back(std::move(r));
    }
    rg.normalize();
    return rg;
}

RuleGraph load_rulegraph(std::string_view document) { return rulegraph_from_json(parse_json(document)); }

Json rulegraph_to_json(const RuleGraph& input) {
    RuleGraph rg = input;
    rg.normalize();
    Json rules = Json::array();
    for (const auto& r : rg.rules) {
        Json nodes = Json::array(), edges = Json::array(), ops = Json::array();
        for (const auto& n : r.nodes)
            nodes.push_back({{"id", n.id}, {"side", side_name(n.side)}, {"class", n.classRef}, {"action", action_name(n.action)}});
        for (const auto& e : r.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"label", e.label}});
        for (const auto& a : r.attrOps) ops.push_back({{"node", a.node}, {"attr", a.attr}, {"expr", a.expr}});
        rules.push_back({{"name", r.name}, {"nodes", nodes}, {"edges", edges}, {"attrOps", ops}});
    }
    return {{"name", rg.name}, {"rules", rules}};
}

std::string save_rulegraph(const RuleGraph& rg) { return canonical_dump(rulegraph_to_json(rg)); }

void validate(const RuleGraph& rg, const Metamodel& src, const Metamodel& dst) {
    std::set<std::string> ruleNames;
    for (const auto& r : rg.rules) {
        std::string ctx = "rule '" + r.name + "'";
        if (!ruleNames.insert(r.name).second) illformed("duplicate " + ctx);
        std::set<std::string> ids;
        for (const auto& n : r.nodes) {
            if (!ids.insert(n.id).second) illformed(ctx + ": duplicate node id '" + n.id + "'");
            if (n.classRef == kNullMarker) continue;
            const Metamodel& mm = n.side == Side::Source ? src : dst;
            if (!mm.find_class(n.classRef))
                illformed(ctx + ": node '" + n.id + "' references class '" + n.classRef + "' unknown to " + mm.name);
        }
        for (const auto& e : r.edges)
            if (!ids.count(e.src) || !ids.count(e.dst))
                illformed(ctx + ": edge " + e.src + " -> " + e.dst + " references a missing node");
        for (const auto& a : r.attrOps)
            if (!ids.count(a.node)) illformed(ctx + ": attribute operation on missing node '" + a.node + "'");
    }
}

std::string_view to_string(WarningCode code) noexcept {
    switch (code) {
    case WarningCode::NullRef: return "W_NULL_REF";
    case WarningCode::AmbiguousMapping: return "W_AMBIGUOUS_MAPPING";
    case WarningCode::AdditionUnhandled: return "W_ADDITION_UNHANDLED";
    case WarningCode::AttrRefBroken: return "W_ATTR_REF_BROKEN";
    }
    return "?";
}

std::size_t WarningReport::count(WarningCode code) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [code](const Warning& w) { return w.code == code; }));
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Replaces whole identifier tokens in one pass, so chained renames do not cascade.
std::string rewrite_tokens(const std::string& text, const std::map<std::string, std::string>& renames) {
    std::string out;
    for (std::size_t i = 0; i < text.size();) {
        if (!ident_char(text[i])) {
            out += text[i++];
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && ident_char(text[j])) ++j;
        std::string tok = text.substr(i, j - i);
        auto it = renames.find(tok);
        out += it == renames.end() ? tok : it->second;
        i = j;
    }
    return out;
}

/// Attribute renames implied by plain copy commands `new := src.old`.
std::map<std::string, std::string> attribute_renames(const mcl::MapRule& rule) {
    std::map<std::string, std::string> out;
    for (const auto& c : rule.commands)
        if (c.operands.size() == 1 && c.operands[0].kind == mcl::Operand::Kind::SrcAttr && c.operands[0].attr != c.targetAttr)
            out.emplace(c.operands[0].attr, c.targetAttr);
    return out;
}

}  // namespace

RuleMigration migrate_rules(const RuleGraph& rg, const mcl::MigrationSpec& spec, const Metamodel& src,
                            const Metamodel& evolved, const Metamodel& dst) {
    validate(rg, src, dst);
    RuleMigration out{rg, {}};
    auto& warnings = out.warnings.entries;
    auto warn = [&](WarningCode code, const Rule& r, const PatternNode& n, std::string message) {
        warnings.push_back({code, r.name, n.id, std::move(message)});
    };

    for (auto& r : out.rules.rules) {
        for (auto& n : r.nodes) {
            if (n.side != Side::Source || n.classRef == kNullMarker) continue;
            auto rules = spec.map_rules_for(n.classRef);
            if (rules.empty()) {
                if (evolved.find_class(n.classRef)) continue;
                // No rule, and the class is gone: its instances cannot survive migration.
                warn(WarningCode::NullRef, r, n,
                     "class '" + n.classRef + "' no longer exists; the null reference must be resolved manually");
                n.classRef = std::string(kNullMarker);
                continue;
            }
            const mcl::MapRule* only = rules.size() == 1 && (rules[0]->unconditional() || rules[0]->otherwise) ? rules[0] : nullptr;
            if (!only) {
                warn(WarningCode::AmbiguousMapping, r, n,
                     "class '" + n.classRef + "' is mapped by " + std::to_string(rules.size()) +
                         " rule(s) with conditions; the mapping should be done manually");
                continue;
            }
            if (only->is_delete()) {
                warn(WarningCode::NullRef, r, n,
                     "class '" + n.classRef + "' is deleted; the null reference must be resolved manually");
                n.classRef = std::string(kNullMarker);
                continue;
            }
            std::string from = n.classRef;
            n.classRef = *only->dstClass;
            auto renames = attribute_renames(*only);
            for (auto& op : r.attrOps) {
                if (op.node != n.id) continue;
                if (auto it = renames.find(op.attr); it != renames.end()) op.attr = it->second;
                op.expr = rewrite_tokens(op.expr, renames);
                if (!evolved.find_attribute(n.classRef, op.attr))
                    warn(WarningCode::AttrRefBroken, r, n,
                         "attribute '" + op.attr + "' of '" + from + "' has no counterpart on '" + n.classRef + "'");
            }
        }
    }
    for (const auto& rule : spec.rules)
        if (std::holds_alternative<mcl::AddRule>(rule))
            warnings.push_back({WarningCode::AdditionUnhandled, "", std::nullopt,
                                "'" + mcl::describe(rule) + "': the additions are not handled by the tool"});
    out.rules.normalize();
    return out;
}

std::string render_warnings_text(const WarningReport& report) {
    std::ostringstream out;
    for (const auto& w : report.entries) {
        out << to_string(w.code);
        if (!w.ruleName.empty()) out << " " << w.ruleName << (w.nodeId ? "/" + *w.nodeId : "");
        out << ": " << w.message << "\n";
    }
    out << report.entries.size() << " warning(s)\n";
    return out.str();
}

Json warnings_to_json(const WarningReport& report) {
    Json out = Json::array();
    for (const auto& w : report.entries)
        out.push_back({{"code", std::string(to_string(w.code))},
                       {"rule", w.ruleName.empty() ? Json(nullptr) : Json(w.ruleName)},
                       {"node", w.nodeId ? Json(*w.nodeId) : Json(nullptr)},
                       {"message", w.message}});
    return out;
}

}  // namespace evolvekit::ummie
