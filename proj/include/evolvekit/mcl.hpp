#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evolvekit/conformance.hpp"
#include "evolvekit/error.hpp"
#include "evolvekit/expr.hpp"
#include "evolvekit/io.hpp"

namespace evolvekit::mcl {

/// One summand of a command expression: `src.attr`, `parent.attr` or a literal.
struct Operand {
    enum class Kind { SrcAttr, ParentAttr, Literal };
    Kind kind = Kind::Literal;
    std::string attr;
    Literal value;
    SourceLocation where;
};

/// `attr := a + b + ...`; `+` adds numbers and concatenates strings.
struct Command {
    std::string targetAttr;
    std::vector<Operand> operands;
    SourceLocation where;
};

/// `map Src => Dst [when cond | otherwise] [reparent Ancestor] [with {...}]`.
/// A missing dstClass is the null class, i.e. deletion.
struct MapRule {
    std::string srcClass;
    std::optional<std::string> dstClass;
    expr::ExprPtr condition;  // over `self`; null when unconditional
    bool otherwise = false;
    std::optional<std::string> reparent;
    std::vector<Command> commands;
    SourceLocation where;

    bool is_delete() const { return !dstClass.has_value(); }
    bool unconditional() const { return !condition; }
};

/// `map assoc A => B`
struct AssocRule {
    std::string from;
    std::string to;
    SourceLocation where;
};

/// `add New in Container [when cond] [with {...}]`, condition over `parent`.
struct AddRule {
    std::string newClass;
    std::string containerClass;
    expr::ExprPtr condition;
    std::vector<Command> commands;
    SourceLocation where;
};

using MclRule = std::variant<MapRule, AssocRule, AddRule>;

struct MigrationSpec {
    std::string name;
    std::string srcName, srcVersion;
    std::string dstName, dstVersion;
    std::vector<MclRule> rules;  // file order
    bool identityForUnmapped = true;

    /// Map rules for one source class: file order, `otherwise` last.
    std::vector<const MapRule*> map_rules_for(std::string_view srcClass) const;
};

/// Syntax only.
MigrationSpec parse_mcl(std::string_view text);
/// Syntax plus typing against the two metamodels (TYPE_ERROR with location).
MigrationSpec parse_mcl(std::string_view text, const Metamodel& src, const Metamodel& dst);
void typecheck_mcl(const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst);

/// Human-readable one-line form of a rule, used in reports.
std::string describe(const MclRule& rule);

enum class LintCode { UnmappedClass, OverlappingConditions, UnknownAttr, UnknownClass };
std::string_view to_string(LintCode code) noexcept;

struct LintEntry {
    LintCode code;
    std::string subject;
    std::string message;
    bool error = false;  // warnings otherwise
};

struct LintReport {
    std::vector<LintEntry> entries;
    bool has_errors(bool strict = false) const;
};

LintReport lint_delta(const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst);

enum class WarningCode { OverlappingConditions, UnmappedClass, AttrDropped, DefaultFilled };
std::string_view to_string(WarningCode code) noexcept;

struct MigrationWarning {
    WarningCode code;
    std::string subject;
    std::string message;
};

struct RuleCount {
    std::size_t ruleIndex;
    std::string rule;
    std::size_t count = 0;
};

struct Dropped {
    std::string id;
    std::string reason;
};

struct MigrationReport {
    std::vector<RuleCount> mapped;  // non-null map rules, file order
    std::vector<std::string> identityCarried;
    std::vector<Dropped> dropped;
    std::vector<Dropped> droppedLinks;
    std::vector<std::string> addedObjects;
    std::vector<MigrationWarning> warnings;

    std::size_t mapped_total() const;
};

/// MIGRATION_INCOMPLETE: names the objects at fault and, when the result failed
/// the final check, the conformance report against the evolved metamodel.
class MigrationError : public Error {
public:
    MigrationError(const std::string& message, std::vector<std::string> objects,
                   std::optional<ConformanceReport> conformance = std::nullopt);

    const std::vector<std::string>& objects() const noexcept { return objects_; }
    const std::optional<ConformanceReport>& conformance() const noexcept { return conformance_; }

private:
    std::vector<std::string> objects_;
    std::optional<ConformanceReport> conformance_;
};

struct MigrationResult {
    Model model;
    MigrationReport report;
};

MigrationResult migrate_model(const Model& m, const MigrationSpec& spec, const Metamodel& src,
                              const Metamodel& dst);

std::string render_lint_text(const LintReport& report);
std::string render_migration_text(const MigrationReport& report);
Json migration_to_json(const MigrationReport& report);
Json lint_to_json(const LintReport& report);

}  // namespace evolvekit::mcl
