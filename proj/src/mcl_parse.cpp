#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "evolvekit/mcl.hpp"

namespace evolvekit::mcl {

using expr::TokenKind;
using expr::TokenStream;

std::vector<const MapRule*> MigrationSpec::map_rules_for(std::string_view srcClass) const {
    std::vector<const MapRule*> out, fallback;
    for (const auto& r : rules)
        if (const auto* m = std::get_if<MapRule>(&r); m && m->srcClass == srcClass)
            (m->otherwise ? fallback : out).push_back(m);
    out.insert(out.end(), fallback.begin(), fallback.end());
    return out;
}

namespace {

std::string version_token(TokenStream& ts) {
    const auto& t = ts.peek();
    if (t.kind != TokenKind::Ident && t.kind != TokenKind::Int && t.kind != TokenKind::Float)
        ts.fail("expected a metamodel version");
    return ts.next().text;
}

Operand operand(TokenStream& ts) {
    Operand op;
    op.where = ts.peek().where;
    if ((ts.is_keyword("src") || ts.is_keyword("parent")) && ts.is_symbol(".", 1)) {
        op.kind = ts.next().text == "src" ? Operand::Kind::SrcAttr : Operand::Kind::ParentAttr;
        ts.next();
        op.attr = ts.expect_ident("an attribute name").text;
        return op;
    }
    op.kind = Operand::Kind::Literal;
    if (ts.peek().kind == TokenKind::String) {
        op.value = ts.next().text;
        return op;
    }
    if (ts.is_keyword("true") || ts.is_keyword("false")) {
        op.value = ts.next().text == "true";
        return op;
    }
    bool negative = ts.accept_symbol("-");
    const auto& t = ts.peek();
    if (t.kind == TokenKind::Int) {
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        ts.next();
        op.value = negative ? -v : v;
        return op;
    }
    if (t.kind == TokenKind::Float) {
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        ts.next();
        op.value = negative ? -v : v;
        return op;
    }
    ts.fail("expected src.<attr>, parent.<attr> or a literal");
}

std::vector<Command> block(TokenStream& ts) {
    std::vector<Command> out;
    if (!ts.accept_keyword("with")) return out;
    ts.expect_symbol("{");
    while (!ts.accept_symbol("}")) {
        Command c;
        c.where = ts.peek().where;
        c.targetAttr = ts.expect_ident("an attribute name").text;
        ts.expect_symbol(":=");
        c.operands.push_back(operand(ts));
        while (ts.accept_symbol("+")) c.operands.push_back(operand(ts));
        ts.accept_symbol(",");
        out.push_back(std::move(c));
    }
    return out;
}

MclRule rule(TokenStream& ts) {
    SourceLocation where = ts.peek().where;
    if (ts.accept_keyword("add")) {
        AddRule r;
        r.where = where;
        r.newClass = ts.expect_ident("a class name").text;
        ts.expect_keyword("in");
        r.containerClass = ts.expect_ident("a container class").text;
        if (ts.accept_keyword("when")) r.condition = expr::parse_expr(ts);
        r.commands = block(ts);
        return r;
    }
    ts.expect_keyword("map");
    if (ts.is_keyword("assoc") && ts.peek(1).kind == TokenKind::Ident && ts.is_symbol("=>", 2)) {
        ts.next();
        AssocRule r;
        r.where = where;
        r.from = ts.next().text;
        ts.expect_symbol("=>");
        r.to = ts.expect_ident("an association name").text;
        return r;
    }
    MapRule r;
    r.where = where;
    r.srcClass = ts.expect_ident("a source class").text;
    ts.expect_symbol("=>");
    std::string dst = ts.expect_ident("a target class or null").text;
    if (dst != "null") r.dstClass = dst;
    if (ts.accept_keyword("when")) {
        r.condition = expr::parse_expr(ts);
    } else if (ts.accept_keyword("otherwise")) {
        r.otherwise = true;
    }
    if (ts.accept_keyword("reparent")) r.reparent = ts.expect_ident("an ancestor class").text;
    r.commands = block(ts);
    return r;
}

}  // namespace

MigrationSpec parse_mcl(std::string_view text) {
    TokenStream ts(expr::tokenize(text));
    MigrationSpec spec;
    ts.expect_keyword("delta");
    spec.name = ts.expect_string("a delta name").text;
    ts.expect_keyword("from");
    spec.srcName = ts.expect_ident("a metamodel name").text;
    spec.srcVersion = version_token(ts);
    ts.expect_keyword("to");
    spec.dstName = ts.expect_ident("a metamodel name").text;
    spec.dstVersion = version_token(ts);
    if (ts.accept_keyword("policy")) {
        ts.expect_keyword("identityForUnmapped");
        if (ts.accept_keyword("true")) {
            spec.identityForUnmapped = true;
        } else if (ts.accept_keyword("false")) {
            spec.identityForUnmapped = false;
        } else {
            ts.fail("expected true or false");
        }
    }
    while (!ts.at_end()) spec.rules.push_back(rule(ts));
    return spec;
}

namespace {

[[noreturn]] void type_error(const std::string& message, std::optional<SourceLocation> where) {
    throw Error(ErrorCode::TypeError, message, where);
}

PrimitiveKind literal_kind(const Literal& v) {
    if (std::holds_alternative<bool>(v)) return PrimitiveKind::Bool;
    if (std::holds_alternative<std::int64_t>(v)) return PrimitiveKind::Int;
    if (std::holds_alternative<double>(v)) return PrimitiveKind::Float;
    return PrimitiveKind::String;
}

/// `srcClass`/`parentClass` name the class each operand kind reads from; an
/// empty name means that operand kind is not available in this rule.
void check_commands(const std::vector<Command>& commands, const Metamodel& targetMm, const std::string& targetClass,
                    const Metamodel& srcMm, const std::string& srcClass, const Metamodel& parentMm,
                    const std::string& parentClass) {
    std::set<std::string> assigned;
    for (const auto& c : commands) {
        const MAttribute* target = targetMm.find_attribute(targetClass, c.targetAttr);
        if (!target) type_error("class '" + targetClass + "' has no attribute '" + c.targetAttr + "'", c.where);
        if (!assigned.insert(c.targetAttr).second)
            type_error("attribute '" + c.targetAttr + "' assigned twice", c.where);
        PrimitiveKind want = target->type.kind;
        bool textual = want == PrimitiveKind::String || want == PrimitiveKind::Enum;
        if (want == PrimitiveKind::Bool && c.operands.size() > 1)
            type_error("'+' is not defined on booleans", c.where);
        for (const auto& op : c.operands) {
            PrimitiveKind got;
            if (op.kind == Operand::Kind::Literal) {
                got = literal_kind(op.value);
            } else {
                bool fromSrc = op.kind == Operand::Kind::SrcAttr;
                const std::string& cls = fromSrc ? srcClass : parentClass;
                const Metamodel& mm = fromSrc ? srcMm : parentMm;
                if (cls.empty())
                    type_error(std::string(fromSrc ? "'src'" : "'parent'") + " is not available in this rule", op.where);
                const MAttribute* a = mm.find_attribute(cls, op.attr);
                if (!a) type_error("class '" + cls + "' has no attribute '" + op.attr + "'", op.where);
                got = a->type.kind;
            }
            bool ok = textual ? (got == PrimitiveKind::String || got == PrimitiveKind::Enum)
                      : want == PrimitiveKind::Float ? (got == PrimitiveKind::Int || got == PrimitiveKind::Float)
                                                     : got == want;
            if (!ok)
                type_error("cannot assign a " + AttrType{got, {}}.name() + " operand to '" + c.targetAttr + "' of type " +
                               target->type.name(),
                           op.where);
        }
    }
}

void require_class(const Metamodel& mm, const std::string& cls, SourceLocation where, const char* side) {
    if (!mm.find_class(cls)) type_error("class '" + cls + "' is not declared by the " + std::string(side) + " metamodel", where);
}

}  // namespace

void typecheck_mcl(const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst) {
    if (spec.srcName != src.name || spec.srcVersion != src.version)
        type_error("delta migrates from " + spec.srcName + " " + spec.srcVersion + ", got " + src.name + " " + src.version,
                   {});
    if (spec.dstName != dst.name || spec.dstVersion != dst.version)
        type_error("delta migrates to " + spec.dstName + " " + spec.dstVersion + ", got " + dst.name + " " + dst.version, {});

    std::set<std::string> otherwiseSeen;
    for (const auto& r : spec.rules) {
        if (const auto* m = std::get_if<MapRule>(&r)) {
            require_class(src, m->srcClass, m->where, "source");
            if (m->dstClass) {
                require_class(dst, *m->dstClass, m->where, "evolved");
            } else if (!m->commands.empty()) {
                type_error("a rule mapping to null cannot assign attributes", m->where);
            }
            if (m->reparent) require_class(src, *m->reparent, m->where, "source");
            if (m->otherwise && !otherwiseSeen.insert(m->srcClass).second)
                type_error("more than one 'otherwise' rule for class '" + m->srcClass + "'", m->where);
            if (m->condition) expr::typecheck(*m->condition, src, {{"self", m->srcClass}});
            if (m->dstClass) check_commands(m->commands, dst, *m->dstClass, src, m->srcClass, dst, "");
        } else if (const auto* a = std::get_if<AssocRule>(&r)) {
            if (!src.find_association(a->from))
                type_error("association '" + a->from + "' is not declared by the source metamodel", a->where);
            if (!dst.find_association(a->to))
                type_error("association '" + a->to + "' is not declared by the evolved metamodel", a->where);
        } else if (const auto* add = std::get_if<AddRule>(&r)) {
            require_class(dst, add->newClass, add->where, "evolved");
            require_class(dst, add->containerClass, add->where, "evolved");
            bool placeable = false;
            for (const auto* k : dst.all_containments(add->containerClass))
                placeable = placeable || dst.is_subtype(add->newClass, k->childClass);
            if (!placeable)
                type_error("class '" + add->containerClass + "' has no containment role for '" + add->newClass + "'",
                           add->where);
            if (add->condition) expr::typecheck(*add->condition, dst, {{"parent", add->containerClass}});
            check_commands(add->commands, dst, add->newClass, src, "", dst, add->containerClass);
        }
    }
}

MigrationSpec parse_mcl(std::string_view text, const Metamodel& src, const Metamodel& dst) {
    MigrationSpec spec = parse_mcl(text);
    typecheck_mcl(spec, src, dst);
    return spec;
}

namespace {

std::string commands_text(const std::vector<Command>& commands) {
    if (commands.empty()) return "";
    std::string out = " with {";
    for (std::size_t i = 0; i < commands.size(); ++i) {
        out += (i ? ", " : " ") + commands[i].targetAttr + " :=";
        for (std::size_t k = 0; k < commands[i].operands.size(); ++k) {
            const auto& op = commands[i].operands[k];
            out += k ? " + " : " ";
            switch (op.kind) {
            case Operand::Kind::SrcAttr: out += "src." + op.attr; break;
            case Operand::Kind::ParentAttr: out += "parent." + op.attr; break;
            case Operand::Kind::Literal: out += literal_to_string(op.value); break;
            }
        }
    }
    return out + " }";
}

}  // namespace

std::string describe(const MclRule& rule) {
    if (const auto* m = std::get_if<MapRule>(&rule)) {
        std::string out = "map " + m->srcClass + " => " + m->dstClass.value_or("null");
        if (m->condition) out += " when " + expr::to_string(*m->condition);
        if (m->otherwise) out += " otherwise";
        if (m->reparent) out += " reparent " + *m->reparent;
        return out + commands_text(m->commands);
    }
    if (const auto* a = std::get_if<AssocRule>(&rule)) return "map assoc " + a->from + " => " + a->to;
    const auto& add = std::get<AddRule>(rule);
    std::string out = "add " + add.newClass + " in " + add.containerClass;
    if (add.condition) out += " when " + expr::to_string(*add.condition);
    return out + commands_text(add.commands);
}

std::string_view to_string(LintCode code) noexcept {
    switch (code) {
    case LintCode::UnmappedClass: return "UNMAPPED_CLASS";
    case LintCode::OverlappingConditions: return "OVERLAPPING_CONDITIONS";
    case LintCode::UnknownAttr: return "UNKNOWN_ATTR";
    case LintCode::UnknownClass: return "UNKNOWN_CLASS";
    }
    return "?";
}

bool LintReport::has_errors(bool strict) const {
    return std::any_of(entries.begin(), entries.end(), [strict](const LintEntry& e) { return e.error || strict; });
}

LintReport lint_delta(const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst) {
    LintReport out;
    auto add = [&](LintCode code, std::string subject, std::string message, bool error) {
        out.entries.push_back(LintEntry{code, std::move(subject), std::move(message), error});
    };

    std::set<std::string> ruled;
    for (const auto& r : spec.rules)
        if (const auto* m = std::get_if<MapRule>(&r)) ruled.insert(m->srcClass);
    for (const auto& c : src.classes)
        if (!ruled.count(c.name) && !dst.find_class(c.name))
            add(LintCode::UnmappedClass, c.name,
                "class '" + c.name + "' has no rule and no same-named class in the evolved metamodel", false);

    for (const auto& cls : ruled) {
        auto rules = spec.map_rules_for(cls);
        std::size_t unconditional = 0;
        std::map<std::string, std::size_t> conditions;
        for (const auto* m : rules) {
            if (!m->otherwise && m->unconditional()) ++unconditional;
            if (m->condition) ++conditions[expr::to_string(*m->condition)];
        }
        bool overlap = unconditional > 1 || (unconditional == 1 && rules.size() > 1);
        for (const auto& [text, n] : conditions)
            if (n > 1) overlap = true;
        if (overlap)
            add(LintCode::OverlappingConditions, cls,
                "rules for '" + cls + "' can apply to the same object; the first in file order wins", false);
    }

    for (const auto& r : spec.rules) {
        const std::vector<Command>* commands = nullptr;
        std::string target;
        std::vector<std::pair<std::string, std::string>> classes;  // name, side
        if (const auto* m = std::get_if<MapRule>(&r)) {
            if (!src.find_class(m->srcClass)) classes.push_back({m->srcClass, "source"});
            if (m->dstClass && !dst.find_class(*m->dstClass)) classes.push_back({*m->dstClass, "evolved"});
            commands = &m->commands;
            target = m->dstClass.value_or("");
        } else if (const auto* a = std::get_if<AddRule>(&r)) {
            if (!dst.find_class(a->newClass)) classes.push_back({a->newClass, "evolved"});
            if (!dst.find_class(a->containerClass)) classes.push_back({a->containerClass, "evolved"});
            commands = &a->commands;
            target = a->newClass;
        }
        for (const auto& [c, side] : classes)
            add(LintCode::UnknownClass, c, "rule '" + describe(r) + "' names unknown " + side + " class " + c, true);
        if (!commands || target.empty() || !dst.find_class(target)) continue;
        for (const auto& c : *commands)
            if (!dst.find_attribute(target, c.targetAttr))
                add(LintCode::UnknownAttr, target + "." + c.targetAttr,
                    "command writes attribute '" + c.targetAttr + "' not declared on '" + target + "'", true);
    }
    return out;
}

std::string render_lint_text(const LintReport& report) {
    std::ostringstream out;
    for (const auto& e : report.entries)
        out << (e.error ? "error " : "warning ") << to_string(e.code) << " " << e.subject << ": " << e.message << "\n";
    return out.str();
}

Json lint_to_json(const LintReport& report) {
    Json entries = Json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"code", std::string(to_string(e.code))},
                           {"subject", e.subject},
                           {"message", e.message},
                           {"severity", e.error ? "error" : "warning"}});
    return entries;
}

}  // namespace evolvekit::mcl
