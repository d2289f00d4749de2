#include "evolvekit/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "evolvekit/conformance.hpp"
#include "evolvekit/constraints.hpp"
#include "evolvekit/diff.hpp"
#include "evolvekit/io.hpp"
#include "evolvekit/mcl.hpp"
#include "evolvekit/refactor.hpp"
#include "evolvekit/ummie.hpp"

namespace evolvekit::cli {

namespace {

namespace fs = std::filesystem;

/// Writes via a temporary sibling file so a failed run never leaves a
/// truncated output behind.
void write_atomically(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, target);
}

struct Options {
    std::string format;
    std::string metamodel, model, constraints, phase;
    std::string left, right, base, out;
    std::string from, to, delta, dest, rules, policy;
    std::string component, container;
    bool strict = false;
    diff::MatchConfig match;
};

bool json_output(const Options& o) { return o.format == "json"; }

Metamodel read_metamodel(const std::string& path) { return load_metamodel(read_file(path)); }
Model read_model(const std::string& path) { return load_model(read_file(path)); }

void require_instance(const Model& m, const Metamodel& mm, const std::string& path) {
    if (m.metamodelName != mm.name)
        throw Error(ErrorCode::MetamodelMismatch,
                    "'" + path + "' instantiates '" + m.metamodelName + "', expected '" + mm.name + "'");
}

int cmd_validate(const Options& o, std::ostream& out) {
    Metamodel mm = read_metamodel(o.metamodel);
    Model m = read_model(o.model);
    auto report = check_conformance(m, mm);
    out << (json_output(o) ? canonical_dump(conformance_to_json(report)) : render_conformance_text(report));
    return report.conformant() ? kOk : kValidation;
}

int cmd_check(const Options& o, std::ostream& out) {
    Metamodel mm = read_metamodel(o.metamodel);
    Model m = read_model(o.model);
    auto suite = constraints::parse_constraints(read_file(o.constraints), mm);
    std::optional<std::string> phase;
    if (!o.phase.empty()) phase = o.phase;
    auto report = constraints::evaluate_suite(suite, m, mm, phase);
    out << constraints::render_report(report, json_output(o) ? constraints::ReportFormat::Json
                                                             : constraints::ReportFormat::Text);
    return report.valid() ? kOk : kValidation;
}

int cmd_diff(const Options& o, std::ostream& out) {
    Metamodel mm = read_metamodel(o.metamodel);
    Model left = read_model(o.left);
    Model right = read_model(o.right);
    require_instance(left, mm, o.left);
    require_instance(right, mm, o.right);
    auto report = diff::diff_models(left, right, diff::match_models(left, right, o.match));
    out << (json_output(o) ? canonical_dump(diff::diff_to_json(report)) : diff::render_diff_text(report));
    return kOk;
}

int cmd_merge(const Options& o, std::ostream& out) {
    Metamodel mm = read_metamodel(o.metamodel);
    Model base = read_model(o.base);
    Model left = read_model(o.left);
    Model right = read_model(o.right);
    require_instance(base, mm, o.base);
    require_instance(left, mm, o.left);
    require_instance(right, mm, o.right);
    auto result = diff::merge3(base, left, right, o.match);
    write_atomically(o.out, save_model(result.merged));
    out << (json_output(o) ? canonical_dump(diff::merge_to_json(result)) : diff::render_merge_text(result));
    return result.conflicts.empty() ? kOk : kConflicts;
}

mcl::MigrationSpec read_delta(const Options& o, const Metamodel& src, const Metamodel& dst) {
    auto spec = mcl::parse_mcl(read_file(o.delta), src, dst);
    if (o.policy == "identity") spec.identityForUnmapped = true;
    if (o.policy == "drop") spec.identityForUnmapped = false;
    return spec;
}

int cmd_migrate(const Options& o, std::ostream& out, std::ostream& err) {
    Metamodel src = read_metamodel(o.from);
    Metamodel dst = read_metamodel(o.to);
    Model m = read_model(o.model);
    auto spec = read_delta(o, src, dst);
    auto lint = mcl::lint_delta(spec, src, dst);
    if (lint.has_errors(o.strict)) {
        if (json_output(o)) {
            out << canonical_dump(Json{{"lint", mcl::lint_to_json(lint)}, {"migrated", false}});
        } else {
            out << mcl::render_lint_text(lint);
        }
        err << "migration refused: the delta has lint " << (o.strict ? "findings (--strict)" : "errors") << "\n";
        return kMigration;
    }
    try {
        auto result = mcl::migrate_model(m, spec, src, dst);
        if (o.strict && !result.report.warnings.empty()) {
            out << (json_output(o) ? canonical_dump(mcl::migration_to_json(result.report))
                                   : mcl::render_migration_text(result.report));
            err << "migration refused: warnings are errors under --strict\n";
            return kMigration;
        }
        write_atomically(o.out, save_model(result.model));
        if (json_output(o)) {
            out << canonical_dump(Json{{"lint", mcl::lint_to_json(lint)},
                                       {"migrated", true},
                                       {"report", mcl::migration_to_json(result.report)}});
        } else {
            out << mcl::render_lint_text(lint) << mcl::render_migration_text(result.report);
        }
        return kOk;
    } catch (const mcl::MigrationError& e) {
        err << e.what() << "\n";
        if (e.conformance()) {
            out << (json_output(o) ? canonical_dump(conformance_to_json(*e.conformance()))
                                   : render_conformance_text(*e.conformance()));
        }
        return kMigration;
    }
}

int cmd_migrate_rules(const Options& o, std::ostream& out) {
    Metamodel src = read_metamodel(o.from);
    Metamodel evolved = read_metamodel(o.to);
    Metamodel dst = read_metamodel(o.dest);
    auto spec = read_delta(o, src, evolved);
    auto rg = ummie::load_rulegraph(read_file(o.rules));
    auto result = ummie::migrate_rules(rg, spec, src, evolved, dst);
    write_atomically(o.out, ummie::save_rulegraph(result.rules));
    out << (json_output(o) ? canonical_dump(ummie::warnings_to_json(result.warnings))
                           : ummie::render_warnings_text(result.warnings));
    return kOk;
}

int cmd_refactor(const std::string& which, const Options& o, std::ostream& out) {
    Model m = read_model(o.model);
    bool statechart = which == "flatten";
    const Metamodel& mm = statechart ? refactor::statechart_metamodel() : refactor::components_metamodel();
    if (!statechart) {
        auto report = check_conformance(m, mm);
        if (m.metamodelName != mm.name || !report.conformant()) {
            out << render_conformance_text(report);
            throw Error(ErrorCode::ModelIllformed, "'" + o.model + "' is not a " + mm.name + " model");
        }
    }
    Model result;
    std::string summary;
    if (which == "push-down") {
        result = refactor::push_down(m, o.component, o.container);
        summary = "pushed " + o.component + " down into " + o.container;
    } else if (which == "pull-up") {
        result = refactor::pull_up(m, o.component);
        summary = "pulled " + o.component + " up";
    } else {
        result = refactor::flatten_statechart(m);
        summary = "flattened " + std::to_string(m.objects.size()) + " objects into " +
                  std::to_string(result.objects.size());
    }
    write_atomically(o.out, save_model(result));
    if (json_output(o)) {
        out << canonical_dump(Json{{"refactoring", which}, {"summary", summary}, {"objects", result.objects.size()}});
    } else {
        out << summary << "\n";
    }
    return kOk;
}

void add_format(CLI::App* cmd, Options& o) {
    cmd->add_option("--format", o.format, "Report format (default: $EVOLVEKIT_FORMAT or text)")
        ->check(CLI::IsMember({"text", "json"}));
}

void add_match(CLI::App* cmd, Options& o) {
    cmd->add_option("--alpha", o.match.alpha, "Propagation weight")->capture_default_str();
    cmd->add_option("--theta", o.match.theta, "Acceptance threshold")->capture_default_str();
    cmd->add_option("--epsilon", o.match.epsilon, "Convergence bound")->capture_default_str();
    cmd->add_option("--max-iter", o.match.maxIter, "Iteration limit")->capture_default_str();
}

CLI::Option* file_in(CLI::App* cmd, const std::string& flag, std::string& target, const std::string& what) {
    return cmd->add_option(flag, target, what)->required()->check(CLI::ExistingFile);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    if (const char* env = std::getenv("EVOLVEKIT_FORMAT"); env && *env) o.format = env;

    CLI::App app{"Metamodel-driven model evolution toolkit", "evolvekit"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Check a model against its metamodel");
    file_in(validate, "--metamodel", o.metamodel, "Metamodel file");
    file_in(validate, "--model", o.model, "Model file");
    add_format(validate, o);

    auto* check = app.add_subcommand("check", "Evaluate a constraint suite with counterexamples");
    file_in(check, "--metamodel", o.metamodel, "Metamodel file");
    file_in(check, "--model", o.model, "Model file");
    file_in(check, "--constraints", o.constraints, "Constraint file");
    check->add_option("--phase", o.phase, "Only evaluate constraints of this phase");
    add_format(check, o);

    auto* diffCmd = app.add_subcommand("diff", "Match two models and report their differences");
    file_in(diffCmd, "--metamodel", o.metamodel, "Metamodel file");
    file_in(diffCmd, "--left", o.left, "Left model");
    file_in(diffCmd, "--right", o.right, "Right model");
    add_match(diffCmd, o);
    add_format(diffCmd, o);

    auto* merge = app.add_subcommand("merge", "Three-way merge against a common base");
    file_in(merge, "--metamodel", o.metamodel, "Metamodel file");
    file_in(merge, "--base", o.base, "Common ancestor");
    file_in(merge, "--left", o.left, "Left model");
    file_in(merge, "--right", o.right, "Right model");
    merge->add_option("--out", o.out, "Merged model output")->required();
    add_match(merge, o);
    add_format(merge, o);

    auto* migrate = app.add_subcommand("migrate", "Migrate a model with an MCL delta");
    file_in(migrate, "--from", o.from, "Original metamodel");
    file_in(migrate, "--to", o.to, "Evolved metamodel");
    file_in(migrate, "--delta", o.delta, "MCL delta");
    file_in(migrate, "--model", o.model, "Model to migrate");
    migrate->add_option("--out", o.out, "Migrated model output")->required();
    migrate->add_flag("--strict", o.strict, "Treat warnings as errors");
    migrate->add_option("--policy", o.policy, "Override the delta's handling of unmapped classes")
        ->check(CLI::IsMember({"identity", "drop"}));
    add_format(migrate, o);

    auto* rules = app.add_subcommand("migrate-rules", "Migrate transformation rule graphs with an MCL delta");
    file_in(rules, "--from", o.from, "Original source metamodel");
    file_in(rules, "--to", o.to, "Evolved source metamodel");
    file_in(rules, "--delta", o.delta, "MCL delta");
    file_in(rules, "--dest", o.dest, "Destination metamodel");
    file_in(rules, "--rules", o.rules, "Rule graph");
    rules->add_option("--out", o.out, "Migrated rule graph output")->required();
    rules->add_option("--policy", o.policy, "Override the delta's handling of unmapped classes")
        ->check(CLI::IsMember({"identity", "drop"}));
    add_format(rules, o);

    auto* refactorCmd = app.add_subcommand("refactor", "Behaviour-preserving refactorings");
    refactorCmd->require_subcommand(1);
    std::string which;
    auto add_refactoring = [&](const std::string& name, const std::string& help, bool component, bool container) {
        auto* cmd = refactorCmd->add_subcommand(name, help);
        file_in(cmd, "--model", o.model, "Input model");
        cmd->add_option("--out", o.out, "Refactored model output")->required();
        if (component) cmd->add_option("--component", o.component, "Component to move")->required();
        if (container) cmd->add_option("--container", o.container, "Sibling that receives the component")->required();
        add_format(cmd, o);
        cmd->callback([&which, name] { which = name; });
    };
    add_refactoring("push-down", "Move a component into a sibling", true, true);
    add_refactoring("pull-up", "Move a component out of its container", true, false);
    add_refactoring("flatten", "Flatten a hierarchical statechart", false, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* failing = &app;
        for (auto* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return kUsage;
    }
    if (o.format.empty()) o.format = "text";
    if (o.format != "text" && o.format != "json") {
        err << "error: EVOLVEKIT_FORMAT must be 'text' or 'json'\n";
        return kUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (check->parsed()) return cmd_check(o, out);
        if (diffCmd->parsed()) return cmd_diff(o, out);
        if (merge->parsed()) return cmd_merge(o, out);
        if (migrate->parsed()) return cmd_migrate(o, out, err);
        if (rules->parsed()) return cmd_migrate_rules(o, out);
        if (refactorCmd->parsed()) return cmd_refactor(which, o, out);
    } catch (const mcl::MigrationError& e) {
        err << e.what() << "\n";
        return kMigration;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.code() == ErrorCode::MigrationIncomplete ? kMigration : kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kUsage;
}

}  // namespace evolvekit::cli
