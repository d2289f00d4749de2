#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvekit/expr.hpp"
#include "evolvekit/io.hpp"

namespace evolvekit::constraints {

struct ConstraintDef {
    std::string name;
    std::string description;
    std::string phase;
    expr::ExprPtr body;
    SourceLocation where;
};

struct ConstraintSuite {
    std::string metamodelName;
    std::vector<ConstraintDef> constraints;
};

/// One falsifying binding of the outermost universal prefix.
using Assignment = expr::Bindings;

struct EvalResult {
    std::string constraintName;
    std::string description;
    std::string phase;
    bool valid = true;
    std::vector<Assignment> counterexamples;  // lexicographic by bound ids
};

struct SuiteReport {
    std::vector<EvalResult> results;  // suite order
    std::vector<std::string> warnings;
    bool valid() const;
};

/// Parses a constraint file and typechecks every body against `mm`. The file's
/// `metamodel` header must name `mm`.
ConstraintSuite parse_constraints(std::string_view text, const Metamodel& mm);

/// Variables of the outermost chain of `forall`s, outermost first.
std::vector<std::string> universal_prefix(const expr::Expr& body);

EvalResult evaluate_constraint(const ConstraintDef& c, const Model& m, const Metamodel& mm);
EvalResult evaluate_constraint(const ConstraintDef& c, const expr::ModelView& view);

SuiteReport evaluate_suite(const ConstraintSuite& suite, const Model& m, const Metamodel& mm,
                           const std::optional<std::string>& phase = std::nullopt);

enum class ReportFormat { Text, Json };

std::string render_report(const SuiteReport& report, ReportFormat format);
/// Counterexample bindings list variables in prefix order, hence ordered_json.
using OrderedJson = nlohmann::ordered_json;
OrderedJson report_to_json(const SuiteReport& report);

}  // namespace evolvekit::constraints
