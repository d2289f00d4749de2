#include <algorithm>

#include "doctest.h"
#include "evolvekit/conformance.hpp"
#include "evolvekit/constraints.hpp"
#include "evolvekit/io.hpp"
#include "evolvekit/mcl.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace evolvekit;
using namespace evolvekit::mcl;
using namespace evolvekit::testing;

namespace {

Metamodel mm(const std::string& name) { return load_metamodel(read_corpus(name)); }
Model model(const std::string& name) { return load_model(read_corpus(name)); }

MigrationResult run(const std::string& delta, const std::string& from, const std::string& to, const Model& m) {
    auto src = mm(from), dst = mm(to);
    return migrate_model(m, parse_mcl(delta, src, dst), src, dst);
}

const std::string& cls(const Model& m, const std::string& id) { return m.objects.at(id).className; }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an evolvekit::Error");
    return ErrorCode::ParseError;
}

bool has_lint(const LintReport& r, LintCode code, const std::string& subject) {
    return std::any_of(r.entries.begin(), r.entries.end(),
                       [&](const LintEntry& e) { return e.code == code && e.subject == subject; });
}

const std::string kHeader = "delta \"T\" from Ports v1 to Ports v2\n";

}  // namespace

TEST_SUITE("mcl-migrate") {
    TEST_CASE("rule forms") {
        auto del = parse_mcl(kHeader + "map Port => null\n");
        REQUIRE(del.rules.size() == 1);
        CHECK(std::get<MapRule>(del.rules[0]).is_delete());

        auto add = parse_mcl(read_corpus("thread-add.mcl"));
        REQUIRE(add.rules.size() == 1);
        const auto& a = std::get<AddRule>(add.rules[0]);
        CHECK(a.newClass == "Thread");
        CHECK(a.containerClass == "Component");
        REQUIRE(a.commands.size() == 1);
        CHECK(a.commands[0].operands.size() == 2);

        auto split = parse_mcl(read_corpus("port-split.mcl"));
        REQUIRE(split.rules.size() == 2);
        CHECK(std::get<MapRule>(split.rules[0]).condition != nullptr);
        CHECK(std::get<MapRule>(split.rules[1]).otherwise);
        CHECK(split.srcVersion == "v1");
        CHECK(split.dstVersion == "v2");

        auto misc = parse_mcl(kHeader + "policy identityForUnmapped false\nmap assoc A => B\nmap Class => Class reparent Top\n");
        CHECK_FALSE(misc.identityForUnmapped);
        CHECK(std::get<AssocRule>(misc.rules[0]).to == "B");
        CHECK(std::get<MapRule>(misc.rules[1]).reparent == "Top");
    }

    TEST_CASE("otherwise rules are tried last") {
        auto spec = parse_mcl(kHeader + "map Port => InPort otherwise\nmap Port => OutPort when self.name = \"x\"\n");
        auto rules = spec.map_rules_for("Port");
        REQUIRE(rules.size() == 2);
        CHECK_FALSE(rules[0]->otherwise);
        CHECK(rules[1]->otherwise);
    }

    TEST_CASE("syntax and type errors") {
        auto v1 = mm("ports-v1.mm.json"), v2 = mm("ports-v2.mm.json");
        CHECK(code_of([] { parse_mcl("delta \"T\" from Ports v1 to\n"); }) == ErrorCode::ParseError);
        CHECK(code_of([] { parse_mcl(kHeader + "map Port =>\n"); }) == ErrorCode::ParseError);
        CHECK(code_of([&] { parse_mcl(kHeader + "map Nope => InPort\n", v1, v2); }) == ErrorCode::TypeError);
        CHECK(code_of([&] { parse_mcl(kHeader + "map Port => InPort with { name := 3 }\n", v1, v2); }) == ErrorCode::TypeError);
        CHECK(code_of([&] { parse_mcl(kHeader + "map Port => null with { name := \"x\" }\n", v1, v2); }) == ErrorCode::TypeError);
        CHECK(code_of([&] { parse_mcl(kHeader + "map Port => InPort when self.width > 1\n", v1, v2); }) == ErrorCode::TypeError);
        CHECK(code_of([&] { parse_mcl("delta \"T\" from Ports v0 to Ports v2\n", v1, v2); }) == ErrorCode::TypeError);
        auto threads = mm("ports-threads.mm.json");
        CHECK(code_of([&] {
                  parse_mcl("delta \"T\" from Ports v1 to Ports threads\nadd Thread in Component with { name := src.name }\n", v1, threads);
              }) == ErrorCode::TypeError);
        try {
            parse_mcl(kHeader + "\nmap Port => Bogus\n", v1, v2);
            FAIL("expected TYPE_ERROR");
        } catch (const Error& e) {
            REQUIRE(e.where());
            CHECK(e.where()->line == 3);
        }
    }

    TEST_CASE("lint") {
        auto v1 = mm("ports-v1.mm.json");
        auto same = v1;
        CHECK(lint_delta(parse_mcl("delta \"I\" from Ports v1 to Ports v1\n"), v1, same).entries.empty());

        auto v3 = mm("ports-v3.mm.json");
        auto unmapped = lint_delta(parse_mcl("delta \"R\" from Ports v1 to Ports v3\n"), v1, v3);
        CHECK(has_lint(unmapped, LintCode::UnmappedClass, "Port"));
        CHECK_FALSE(unmapped.has_errors());
        CHECK(unmapped.has_errors(true));

        auto overlap = lint_delta(parse_mcl("delta \"O\" from Ports v1 to Ports v3\nmap Port => InPort\nmap Port => OutPort\n"), v1, v3);
        CHECK(has_lint(overlap, LintCode::OverlappingConditions, "Port"));

        auto unknown = lint_delta(parse_mcl("delta \"U\" from Ports v1 to Ports v3\nmap Port => Gone\nmap InPort => InPort with { width := 1 }\n"),
                                  v1, v3);
        CHECK(has_lint(unknown, LintCode::UnknownClass, "Gone"));
        CHECK(unknown.has_errors());
    }

    TEST_CASE("identity delta reproduces the input") {
        Rng rng(21);
        for (int i = 0; i < 20; ++i) {
            auto meta = random_metamodel(rng);
            auto m = random_model(meta, rng, 80);
            auto spec = parse_mcl("delta \"I\" from Gen v1 to Gen v1\n", meta, meta);
            auto res = migrate_model(m, spec, meta, meta);
            CHECK(save_model(res.model) == save_model(m));
            CHECK(res.report.identityCarried.size() == m.objects.size());
        }
    }

    TEST_CASE("port split follows first-match order") {
        auto res = run(read_corpus("port-split.mcl"), "ports-v1.mm.json", "ports-v2.mm.json", model("ports.model.json"));
        const auto& out = res.model;
        CHECK(cls(out, "p3") == "OutPort");
        CHECK(cls(out, "pc") == "OutPort");
        CHECK(cls(out, "p11") == "InPort");
        CHECK(cls(out, "p12") == "InPort");
        CHECK(cls(out, "p22") == "InPort");
        CHECK(out.links.size() == 3);
        CHECK(check_conformance(out, mm("ports-v2.mm.json")).conformant());
        REQUIRE(res.report.mapped.size() == 2);
        CHECK(res.report.mapped[0].count == 2);
        CHECK(res.report.mapped[1].count == 3);
    }

    TEST_CASE("port removal lands on the evolved metamodel") {
        auto res = run(read_corpus("port-removal.mcl"), "ports-v1.mm.json", "ports-v3.mm.json", model("ports.model.json"));
        CHECK(check_conformance(res.model, mm("ports-v3.mm.json")).conformant());
        CHECK(cls(res.model, "p3") == "OutPort");
    }

    TEST_CASE("thread addition gives one thread per component") {
        auto res = run(read_corpus("thread-add.mcl"), "ports-v1.mm.json", "ports-threads.mm.json", model("ports.model.json"));
        CHECK(res.report.addedObjects.size() == 4);
        for (const char* c : {"Component1", "Component2", "C1", "C2"}) {
            const auto& kids = res.model.objects.at(c).children.at("threads");
            REQUIRE(kids.size() == 1);
            CHECK(kids[0] == std::string(c) + "/Thread/0");
            CHECK(std::get<std::string>(res.model.objects.at(kids[0]).attributes.at("name")) ==
                  std::get<std::string>(res.model.objects.at(c).attributes.at("name")) + "_t0");
        }
        auto threads = mm("ports-threads.mm.json");
        auto suite = constraints::parse_constraints(read_corpus("threads.constraints"), threads);
        CHECK(constraints::evaluate_suite(suite, res.model, threads).valid());
    }

    TEST_CASE("deletion cascades and removes incident links") {
        auto src = model("legacy.model.json");
        auto res = run(read_corpus("legacy-delete.mcl"), "legacy-v1.mm.json", "legacy-v2.mm.json", src);
        for (const auto& [id, o] : res.model.objects) CHECK(o.className != "LegacyThing");
        for (const char* id : {"old1", "old2", "part1"}) CHECK_FALSE(res.model.objects.count(id));
        CHECK(res.model.links.size() == 1);
        CHECK(res.model.links.count("r1"));
        CHECK(res.report.droppedLinks.size() == 3);
        CHECK(res.report.mapped_total() + res.report.identityCarried.size() + res.report.dropped.size() == src.objects.size());
    }

    TEST_CASE("reparent hoists classes to the grandparent") {
        auto res = run(read_corpus("reparent.mcl"), "hier-v1.mm.json", "hier-v2.mm.json", model("hier.model.json"));
        const auto& out = res.model;
        CHECK(out.objects.at("gp1").children.at("classes") == std::vector<std::string>{"c1", "c2", "c3"});
        CHECK(out.objects.at("gp2").children.at("classes") == std::vector<std::string>{"c4"});
        CHECK(out.objects.at("pa1").children.at("others") == std::vector<std::string>{"o1"});
        CHECK(out.objects.at("pa3").children.at("others") == std::vector<std::string>{"o2"});
        CHECK_FALSE(out.objects.at("pa1").children.count("classes"));
        CHECK(check_conformance(out, mm("hier-v2.mm.json")).conformant());
    }

    TEST_CASE("reparent rescues a descendant of a deleted object") {
        auto res = run("delta \"H\" from Hier v1 to Hier v2\nmap Parent => null\nmap Class => Class reparent ParentParent\n"
                       "map Other => null\n",
                       "hier-v1.mm.json", "hier-v2.mm.json", model("hier.model.json"));
        CHECK(res.model.objects.size() == 6);
        CHECK(res.model.objects.at("gp2").children.at("classes") == std::vector<std::string>{"c4"});
    }

    TEST_CASE("attribute handling") {
        // A required attribute with a default is filled; without one the migration fails.
        auto src = load_metamodel(R"({"name": "A", "version": "1", "classes": [{"name": "X", "attributes": [
            {"name": "old", "type": "string"}]}]})");
        auto withDefault = load_metamodel(R"({"name": "A", "version": "2", "classes": [{"name": "X", "attributes": [
            {"name": "n", "type": "int", "required": true, "default": 4}]}]})");
        auto noDefault = load_metamodel(R"({"name": "A", "version": "2", "classes": [{"name": "X", "attributes": [
            {"name": "n", "type": "int", "required": true}]}]})");
        auto m = load_model(R"({"metamodel": "A", "metamodelVersion": "1", "roots": ["x"],
                               "objects": [{"id": "x", "class": "X", "attrs": {"old": "v"}}]})");
        auto spec = parse_mcl("delta \"D\" from A 1 to A 2\n", src, withDefault);
        auto res = migrate_model(m, spec, src, withDefault);
        CHECK(std::get<std::int64_t>(res.model.objects.at("x").attributes.at("n")) == 4);
        auto codes = [&] {
            std::vector<WarningCode> out;
            for (const auto& w : res.report.warnings) out.push_back(w.code);
            return out;
        }();
        CHECK(std::count(codes.begin(), codes.end(), WarningCode::DefaultFilled) == 1);
        CHECK(std::count(codes.begin(), codes.end(), WarningCode::AttrDropped) == 1);

        try {
            migrate_model(m, parse_mcl("delta \"D\" from A 1 to A 2\n", src, noDefault), src, noDefault);
            FAIL("expected MIGRATION_INCOMPLETE");
        } catch (const MigrationError& e) {
            CHECK(e.code() == ErrorCode::MigrationIncomplete);
            CHECK(e.objects() == std::vector<std::string>{"x"});
        }

        auto cmd = migrate_model(m, parse_mcl("delta \"D\" from A 1 to A 2\nmap X => X with { n := 40 + 2 }\n", src, noDefault), src,
                                 noDefault);
        CHECK(std::get<std::int64_t>(cmd.model.objects.at("x").attributes.at("n")) == 42);
    }

    TEST_CASE("a non-conformant source is refused") {
        auto m = model("ports.model.json");
        m.objects.at("p11").attributes.erase("name");
        CHECK_THROWS_AS(run(read_corpus("port-split.mcl"), "ports-v1.mm.json", "ports-v2.mm.json", m), MigrationError);
    }

    TEST_CASE("input order does not change the output") {
        auto doc = parse_json(read_corpus("ports.model.json"));
        auto shuffled = doc;
        Rng rng(1);
        std::shuffle(shuffled["objects"].begin(), shuffled["objects"].end(), rng);
        auto a = run(read_corpus("port-split.mcl"), "ports-v1.mm.json", "ports-v2.mm.json", model_from_json(doc));
        auto b = run(read_corpus("port-split.mcl"), "ports-v1.mm.json", "ports-v2.mm.json", model_from_json(shuffled));
        CHECK(save_model(a.model) == save_model(b.model));
        CHECK(render_migration_text(a.report) == render_migration_text(b.report));
    }

    TEST_CASE("generated deltas migrate into conformant models") {
        Rng rng(33);
        for (int i = 0; i < 30; ++i) {
            auto meta = random_metamodel(rng);
            auto m = random_model(meta, rng, 120);
            auto delta = random_delta(meta, rng);
            auto spec = parse_mcl(delta.text, meta, delta.evolved);
            auto res = migrate_model(m, spec, meta, delta.evolved);
            CHECK(check_conformance(res.model, delta.evolved).conformant());
            for (const auto& [id, o] : res.model.objects) {
                auto it = m.objects.find(id);
                if (it == m.objects.end()) continue;
                CHECK_FALSE(delta.truth.deletedClasses.count(it->second.className));
            }
        }
    }
}
