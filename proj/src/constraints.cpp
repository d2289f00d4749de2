#include "evolvekit/constraints.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace evolvekit::constraints {

using expr::Expr;
using expr::ModelView;
using expr::Quantifier;

bool SuiteReport::valid() const {
    return std::all_of(results.begin(), results.end(), [](const EvalResult& r) { return r.valid; });
}

ConstraintSuite parse_constraints(std::string_view text, const Metamodel& mm) {
    expr::TokenStream ts(expr::tokenize(text));
    ConstraintSuite suite;
    ts.expect_keyword("metamodel");
    const auto& header = ts.expect_ident("a metamodel name");
    suite.metamodelName = header.text;
    if (suite.metamodelName != mm.name)
        throw Error(ErrorCode::TypeError,
                    "constraints are written for '" + suite.metamodelName + "', not '" + mm.name + "'",
                    header.where);

    std::set<std::string> names;
    while (!ts.at_end()) {
        ConstraintDef c;
        c.where = ts.expect_keyword("constraint").where;
        const auto& name = ts.expect_ident("a constraint name");
        c.name = name.text;
        if (!names.insert(c.name).second)
            throw Error(ErrorCode::TypeError, "duplicate constraint '" + c.name + "'", name.where);
        c.description = ts.expect_string("an informal description").text;
        ts.expect_keyword("phase");
        c.phase = ts.expect_ident("a phase name").text;
        ts.expect_symbol(":");
        c.body = expr::parse_expr(ts);
        expr::typecheck(*c.body, mm, {});
        suite.constraints.push_back(std::move(c));
    }
    return suite;
}

std::vector<std::string> universal_prefix(const Expr& body) {
    std::vector<std::string> vars;
    const Expr* cur = &body;
    while (const auto* q = std::get_if<Quantifier>(&cur->node)) {
        if (!q->universal) break;
        vars.push_back(q->var);
        cur = q->body.get();
    }
    return vars;
}

namespace {

/// Enumerates the universal prefix; tuples whose residual body fails are
/// recorded. Nested loops over id-sorted collections yield lexicographic order.
void enumerate(const ModelView& view, const Expr& e, expr::Bindings& env,
               std::vector<Assignment>& out) {
    if (const auto* q = std::get_if<Quantifier>(&e.node); q && q->universal) {
        for (const auto& id : view.collection(q->coll, env)) {
            env.emplace_back(q->var, id);
            enumerate(view, *q->body, env, out);
            env.pop_back();
        }
        return;
    }
    if (!view.holds(e, env)) out.push_back(env);
}

}  // namespace

EvalResult evaluate_constraint(const ConstraintDef& c, const ModelView& view) {
    EvalResult r;
    r.constraintName = c.name;
    r.description = c.description;
    r.phase = c.phase;
    expr::Bindings env;
    if (universal_prefix(*c.body).empty()) {
        r.valid = view.holds(*c.body, env);
        return r;
    }
    enumerate(view, *c.body, env, r.counterexamples);
    r.valid = r.counterexamples.empty();
    return r;
}

EvalResult evaluate_constraint(const ConstraintDef& c, const Model& m, const Metamodel& mm) {
    ModelView view(m, mm);
    return evaluate_constraint(c, view);
}

SuiteReport evaluate_suite(const ConstraintSuite& suite, const Model& m, const Metamodel& mm,
                           const std::optional<std::string>& phase) {
    SuiteReport report;
    ModelView view(m, mm);
    for (const auto& id : view.unknown_objects())
        report.warnings.push_back("object '" + id + "' of unknown class '" + m.find(id)->className +
                                  "' excluded from evaluation");
    for (const auto& c : suite.constraints) {
        if (phase && c.phase != *phase) continue;
        report.results.push_back(evaluate_constraint(c, view));
    }
    return report;
}

namespace {

std::string bindings_text(const Assignment& a) {
    std::string out;
    for (const auto& [var, id] : a) {
        if (!out.empty()) out += ' ';
        out += var + "=" + id;
    }
    return out;
}

}  // namespace

OrderedJson report_to_json(const SuiteReport& report) {
    OrderedJson results = OrderedJson::array();
    for (const auto& r : report.results) {
        OrderedJson ces = OrderedJson::array();
        for (const auto& a : r.counterexamples) {
            OrderedJson binding = OrderedJson::object();
            for (const auto& [var, id] : a) binding[var] = id;
            ces.push_back(std::move(binding));
        }
        OrderedJson jr = OrderedJson::object();
        jr["name"] = r.constraintName;
        jr["description"] = r.description;
        jr["phase"] = r.phase;
        jr["valid"] = r.valid;
        jr["counterexamples"] = std::move(ces);
        results.push_back(std::move(jr));
    }
    OrderedJson doc = OrderedJson::object();
    doc["valid"] = report.valid();
    doc["results"] = std::move(results);
    doc["warnings"] = report.warnings;
    return doc;
}

std::string render_report(const SuiteReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

    std::ostringstream out;
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    std::size_t violated = 0;
    for (const auto& r : report.results) {
        out << "constraint " << r.constraintName << " [" << r.phase << "]: "
            << (r.valid ? "satisfied" : "VIOLATED") << "\n";
        if (r.valid) continue;
        ++violated;
        out << "  " << r.description << "\n";
        if (r.counterexamples.empty()) {
            out << "  (no universally quantified variables to report)\n";
        }
        for (const auto& a : r.counterexamples) out << "  counterexample: " << bindings_text(a) << "\n";
    }
    if (violated == 0) {
        out << "ALL CONSTRAINTS SATISFIED\n";
    } else {
        out << violated << " of " << report.results.size() << " constraint(s) violated\n";
    }
    return out.str();
}

}  // namespace evolvekit::constraints
