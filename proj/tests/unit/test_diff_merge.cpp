#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "evolvekit/diff.hpp"
#include "evolvekit/error.hpp"
#include "evolvekit/io.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace evolvekit;
using namespace evolvekit::diff;
using namespace evolvekit::testing;

namespace {

Model single(const std::string& id, const std::string& value) {
    Model m;
    m.metamodelName = "M";
    m.metamodelVersion = "1";
    m.roots = {id};
    m.objects.emplace(id, MObject{id, "A", {{"s", value}}, {}});
    return m;
}

}  // namespace

TEST_SUITE("diff-merge") {
    TEST_CASE("string and attribute similarity") {
        CHECK(string_similarity("abc", "abd") == doctest::Approx(1.0 - 1.0 / 3.0));
        CHECK(string_similarity("", "") == 1.0);
        CHECK(string_similarity("abc", "") == 0.0);
        MObject a{"a", "A", {{"x", std::int64_t{1}}, {"y", std::string("q")}}, {}};
        MObject b{"b", "A", {{"x", std::int64_t{1}}, {"z", true}}, {}};
        CHECK(attribute_similarity(a, b) == doctest::Approx(1.0 / 3.0));
        CHECK(attribute_similarity(MObject{}, MObject{}) == 1.0);
    }

    TEST_CASE("self match is the identity with score 1") {
        auto m = load_model(read_corpus("ports.model.json"));
        auto match = match_models(m, m);
        REQUIRE(match.pairs.size() == m.objects.size());
        for (const auto& p : match.pairs) {
            CHECK(p.left == p.right);
            CHECK(p.score == doctest::Approx(1.0));
        }
    }

    TEST_CASE("abc against abd") {
        auto match = match_models(single("l", "abc"), single("r", "abd"));
        REQUIRE(match.pairs.size() == 1);
        CHECK(match.pairs[0].score == doctest::Approx(1.0 - 1.0 / 3.0));
        CHECK(match_models(single("l", "abc"), single("r", "xyz")).pairs.empty());
    }

    TEST_CASE("classes gate matching and metamodels must agree") {
        auto l = single("l", "abc");
        auto r = single("r", "abc");
        r.objects.at("r").className = "B";
        CHECK(match_models(l, r).pairs.empty());
        r.metamodelName = "N";
        CHECK_THROWS_AS(match_models(l, r), Error);
        MatchConfig bad;
        bad.alpha = 2.0;
        CHECK_THROWS_AS(bad.validate(), Error);
    }

    TEST_CASE("diff of a model with itself is empty") {
        Rng rng(5);
        for (int i = 0; i < 20; ++i) {
            auto mm = random_metamodel(rng);
            auto m = random_model(mm, rng, 50);
            CHECK(diff_models(m, m, match_models(m, m)).empty());
        }
    }

    TEST_CASE("single edit and single deletion") {
        auto m = load_model(read_corpus("ports.model.json"));
        auto edited = m;
        edited.objects.at("p12").attributes["name"] = std::string("renamed");
        auto d = diff_models(m, edited, match_by_id(m, edited));
        REQUIRE(d.changed.size() == 1);
        CHECK(d.changed[0].leftId == "p12");
        CHECK(d.changed[0].attr == "name");
        CHECK(attribute_edits_by_id(m, edited).size() == 1);
        CHECK(d.added.empty());
        CHECK(d.removed.empty());

        auto deleted = m;
        std::erase(deleted.objects.at("Component1").children.at("ports"), "p3");
        deleted.objects.erase("p3");
        std::erase_if(deleted.links, [](const auto& kv) { return kv.second.src == "p3" || kv.second.dst == "p3"; });
        d = diff_models(m, deleted, match_by_id(m, deleted));
        CHECK(d.removed == std::vector<std::string>{"p3"});
        CHECK(d.linkRemoved == std::vector<std::string>{"l1", "l2", "l3"});
        CHECK(d.changed.empty());
    }

    TEST_CASE("moves are reported") {
        auto m = load_model(read_corpus("ports.model.json"));
        auto moved = m;
        std::erase(moved.objects.at("C1").children.at("ports"), "p12");
        moved.objects.at("C2").children["ports"].push_back("p12");
        moved.normalize();
        auto d = diff_models(m, moved, match_by_id(m, moved));
        REQUIRE(d.moved.size() == 1);
        CHECK(d.moved[0].oldParent == "C1");
        CHECK(d.moved[0].newParent == "C2");
    }

    TEST_CASE("reports are deterministic and parseable") {
        auto m = load_model(read_corpus("ports.model.json"));
        auto edited = m;
        edited.objects.at("p11").attributes["name"] = std::string("q");
        auto d = diff_models(m, edited, match_models(m, edited));
        CHECK(render_diff_text(d) == render_diff_text(diff_models(m, edited, match_models(m, edited))));
        CHECK(diff_to_json(d).is_object());
    }

    TEST_CASE("merge of unchanged sides is the base") {
        auto b = load_model(read_corpus("ports.model.json"));
        auto r = merge3(b, b, b);
        CHECK(r.conflicts.empty());
        CHECK(save_model(r.merged) == save_model(b));
    }

    TEST_CASE("independent attribute edits both land") {
        auto b = load_model(read_corpus("ports.model.json"));
        auto l = b, r = b;
        l.objects.at("p11").attributes["name"] = std::string("p11x");
        r.objects.at("p22").attributes["name"] = std::string("p22y");
        auto res = merge3(b, l, r);
        CHECK(res.conflicts.empty());
        CHECK(std::get<std::string>(res.merged.objects.at("p11").attributes.at("name")) == "p11x");
        CHECK(std::get<std::string>(res.merged.objects.at("p22").attributes.at("name")) == "p22y");
    }

    TEST_CASE("divergent edits conflict and keep the base value") {
        auto b = load_model(read_corpus("ports.model.json"));
        auto l = b, r = b;
        l.objects.at("p11").attributes["name"] = std::string("p11L");
        r.objects.at("p11").attributes["name"] = std::string("p11R");
        auto res = merge3(b, l, r);
        REQUIRE(res.conflicts.size() == 1);
        CHECK(res.conflicts[0].kind == ConflictKind::AttrAttr);
        CHECK(res.conflicts[0].baseId == "p11");
        CHECK(std::get<std::string>(res.merged.objects.at("p11").attributes.at("name")) == "p11");
        CHECK(render_merge_text(res).find("CONFLICT") != std::string::npos);
    }

    TEST_CASE("additions on both sides with the same id are kept apart") {
        auto b = load_model(read_corpus("ports.model.json"));
        auto l = b, r = b;
        l.objects.emplace("pn", MObject{"pn", "Port", {{"name", std::string("left")}}, {}});
        l.objects.at("C2").children["ports"].push_back("pn");
        r.objects.emplace("pn", MObject{"pn", "Port", {{"name", std::string("right")}}, {}});
        r.objects.at("C1").children["ports"].push_back("pn");
        l.validate();
        r.validate();
        auto res = merge3(b, l, r);
        CHECK(res.conflicts.empty());
        CHECK(res.merged.objects.size() == b.objects.size() + 2);
    }

    TEST_CASE("scripted disjoint merges equal applying both scripts") {
        Rng rng(9);
        for (int i = 0; i < 20; ++i) {
            auto mm = random_metamodel(rng);
            auto base = random_model(mm, rng, 40);
            std::set<std::string> lo, ro;
            for (const auto& [id, o] : base.objects) (coin(rng) ? lo : ro).insert(id);
            auto ls = random_script(base, mm, lo, "L", rng);
            auto rs = random_script(base, mm, ro, "R", rng);
            EditScript both = ls;
            both.insert(both.end(), rs.begin(), rs.end());
            auto res = merge3(base, apply_script(base, ls), apply_script(base, rs));
            CHECK(res.conflicts.empty());
            CHECK(save_model(res.merged) == save_model(apply_script(base, both)));
        }
    }
}
