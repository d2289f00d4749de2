#include <algorithm>

#include "doctest.h"
#include "evolvekit/conformance.hpp"
#include "evolvekit/error.hpp"
#include "evolvekit/io.hpp"
#include "evolvekit/refactor.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace evolvekit;
using namespace evolvekit::refactor;
using namespace evolvekit::testing;

namespace {

Model components() { return load_model(read_corpus("components.model.json")); }
Model chart() { return load_model(read_corpus("statechart.model.json")); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an evolvekit::Error");
    return ErrorCode::ParseError;
}

const MLink* link_between(const Model& m, const std::string& src, const std::string& dst) {
    for (const auto& [id, l] : m.links)
        if (l.src == src && l.dst == dst) return &l;
    return nullptr;
}

// Flat machine: s1 -t-> s2 -t-> s1.
Model toggle() {
    return load_model(R"({"metamodel": "StatechartFlat", "metamodelVersion": "1", "roots": ["sm"],
      "objects": [
        {"id": "sm", "class": "StateMachine", "children": {"states": ["s1", "s2"], "transitions": ["t1", "t2"]}},
        {"id": "s1", "class": "State", "attrs": {"initial": true}},
        {"id": "s2", "class": "State"},
        {"id": "t1", "class": "Transition", "attrs": {"event": "t"}},
        {"id": "t2", "class": "Transition", "attrs": {"event": "t"}}],
      "links": [
        {"id": "t1.s", "assoc": "TransitionSource", "src": "t1", "dst": "s1"},
        {"id": "t1.t", "assoc": "TransitionTarget", "src": "t1", "dst": "s2"},
        {"id": "t2.s", "assoc": "TransitionSource", "src": "t2", "dst": "s2"},
        {"id": "t2.t", "assoc": "TransitionTarget", "src": "t2", "dst": "s1"}]})");
}

std::vector<std::vector<std::string>> all_words(int maxLen) {
    std::vector<std::vector<std::string>> out, frontier{{}};
    for (int len = 1; len <= maxLen; ++len) {
        std::vector<std::vector<std::string>> next;
        for (const auto& w : frontier)
            for (const char* e : {"a", "b"}) {
                auto x = w;
                x.push_back(e);
                next.push_back(x);
            }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

}  // namespace

TEST_SUITE("refactor") {
    TEST_CASE("locality and ownership") {
        auto m = components();
        CHECK(owner_of(m, "K.i") == "K");
        CHECK(owner_of(m, "K") == "");
        for (const auto& [id, l] : m.links) CHECK(channel_is_local(m, l));
        CHECK_FALSE(channel_is_local(m, MLink{"x", "Channel", "A.o", "K.i"}));
        CHECK(is_generated_port("D/bp/0"));
        CHECK_FALSE(is_generated_port("D.i"));
    }

    TEST_CASE("connectivity") {
        auto m = components();
        CHECK(flattened_connectivity(m) == Connectivity{{"A.o", "B.i"}, {"A.o", "K.i"}});
        Model bare = m;
        bare.links.clear();
        CHECK(flattened_connectivity(bare).empty());
    }

    TEST_CASE("push-down splits the boundary-crossing channel") {
        auto m = components();
        auto out = push_down(m, "A", "D");
        CHECK(out.objects.at("D").children.at("sub") == std::vector<std::string>{"A", "K"});
        REQUIRE(out.objects.count("D/bp/0"));
        CHECK(std::get<std::string>(out.objects.at("D/bp/0").attributes.at("direction")) == "out");
        CHECK(out.links.at("ch1").src == "A.o");
        CHECK(out.links.at("ch1").dst == "D/bp/0");
        CHECK(out.links.at("D/bc/0").dst == "B.i");
        CHECK(out.links.at("ch2").dst == "D.i");
        for (const auto& [id, l] : out.links) CHECK(channel_is_local(out, l));
        CHECK(flattened_connectivity(out) == flattened_connectivity(m));
        CHECK(check_conformance(out, components_metamodel()).conformant());
    }

    TEST_CASE("pull-up undoes push-down") {
        auto m = components();
        auto back = pull_up(push_down(m, "A", "D"), "A");
        CHECK(save_model(back) == save_model(m));
    }

    TEST_CASE("push-down without channels is a pure move") {
        auto m = components();
        m.links.clear();
        auto out = push_down(m, "B", "D");
        CHECK(out.objects.size() == m.objects.size());
        CHECK(out.links.empty());
        CHECK(out.roots == std::vector<std::string>{"A", "D"});
    }

    TEST_CASE("a relay port shared by two clients survives pull-up") {
        auto m = load_model(R"({"metamodel": "Components", "metamodelVersion": "1", "roots": ["B", "D"],
          "objects": [
            {"id": "B", "class": "Component", "children": {"ports": ["B.i"]}},
            {"id": "D", "class": "Component", "children": {"ports": ["D/bp/0"], "sub": ["A", "X"]}},
            {"id": "A", "class": "Component", "children": {"ports": ["A.o"]}},
            {"id": "X", "class": "Component", "children": {"ports": ["X.o"]}},
            {"id": "A.o", "class": "Port", "attrs": {"direction": "out"}},
            {"id": "X.o", "class": "Port", "attrs": {"direction": "out"}},
            {"id": "B.i", "class": "Port", "attrs": {"direction": "in"}},
            {"id": "D/bp/0", "class": "Port", "attrs": {"direction": "out"}}],
          "links": [
            {"id": "a", "assoc": "Channel", "src": "A.o", "dst": "D/bp/0"},
            {"id": "x", "assoc": "Channel", "src": "X.o", "dst": "D/bp/0"},
            {"id": "out", "assoc": "Channel", "src": "D/bp/0", "dst": "B.i"}]})");
        auto up = pull_up(m, "A");
        CHECK(up.objects.count("D/bp/0"));
        REQUIRE(link_between(up, "A.o", "B.i"));
        CHECK(link_between(up, "A.o", "B.i")->id == "a");
        CHECK(link_between(up, "X.o", "D/bp/0"));
        CHECK(flattened_connectivity(up) == flattened_connectivity(m));
    }

    TEST_CASE("generated ports without traffic are collected") {
        auto m = components();
        m.objects.emplace("D/bp/7", MObject{"D/bp/7", "Port", {{"direction", std::string("in")}}, {}});
        m.objects.at("D").children["ports"].push_back("D/bp/7");
        m.links.emplace("dead", MLink{"dead", "Channel", "B.i", "D/bp/7"});
        auto out = collect_generated_ports(m);
        CHECK_FALSE(out.objects.count("D/bp/7"));
        CHECK_FALSE(out.links.count("dead"));
        CHECK(save_model(out) == save_model(components()));
    }

    TEST_CASE("refactoring errors") {
        auto m = components();
        CHECK(code_of([&] { push_down(m, "A", "K"); }) == ErrorCode::NotSiblings);
        CHECK(code_of([&] { push_down(m, "A", "nope"); }) == ErrorCode::IdUnknown);
        CHECK(code_of([&] { push_down(m, "A", "A"); }) == ErrorCode::NotSiblings);
        CHECK(code_of([&] { pull_up(m, "A"); }) == ErrorCode::AtRoot);
        CHECK(code_of([&] { pull_up(m, "ghost"); }) == ErrorCode::IdUnknown);
    }

    TEST_CASE("random push-down and pull-up keep connectivity") {
        Rng rng(17);
        int pushes = 0, pulls = 0;
        for (int i = 0; i < 40; ++i) {
            auto m = random_components(rng);
            auto before = flattened_connectivity(m);
            auto pushCands = connectivity_safe_pushes(m);
            if (!pushCands.empty()) {
                auto [c, d] = pushCands[std::size_t(uniform(rng, 0, int(pushCands.size()) - 1))];
                auto pushed = push_down(m, c, d);
                ++pushes;
                CHECK(flattened_connectivity(pushed) == before);
                CHECK(check_conformance(pushed, components_metamodel()).conformant());
                for (const auto& [id, l] : pushed.links) CHECK(channel_is_local(pushed, l));
                CHECK(save_model(pull_up(pushed, c)) == save_model(m));
            }
            auto pullCands = connectivity_safe_pulls(m);
            if (!pullCands.empty()) {
                auto c = pullCands[std::size_t(uniform(rng, 0, int(pullCands.size()) - 1))];
                auto pulled = pull_up(m, c);
                ++pulls;
                CHECK(flattened_connectivity(pulled) == before);
                for (const auto& [id, l] : pulled.links) CHECK(channel_is_local(pulled, l));
            }
        }
        CHECK(pushes > 10);
        CHECK(pulls > 10);
    }

    TEST_CASE("statechart validation") {
        CHECK_NOTHROW(validate_statechart(chart()));
        auto twoInitial = chart();
        twoInitial.objects.at("a2").attributes["initial"] = true;
        CHECK(code_of([&] { validate_statechart(twoInitial); }) == ErrorCode::IllformedStatechart);
        CHECK(code_of([&] { validate_statechart(components()); }) == ErrorCode::IllformedStatechart);
    }

    TEST_CASE("toggle simulation") {
        CHECK(simulate(toggle(), {"t", "t"}) == std::vector<std::string>{"s2", "s1"});
        CHECK(simulate(toggle(), {}) == std::vector<std::string>{"s1"});
        CHECK(simulate(toggle(), {"x"}) == std::vector<std::string>{"s1"});
        CHECK(save_model(flatten_statechart(toggle())) == save_model(toggle()));
    }

    TEST_CASE("flattening replicates outer transitions with inner priority") {
        auto flat = flatten_statechart(chart());
        CHECK(check_conformance(flat, flat_statechart_metamodel()).conformant());
        std::vector<std::string> states = flat.objects.at("sm").children.at("states");
        CHECK(states == std::vector<std::string>{"a1", "a2", "b1"});
        CHECK(flat.objects.at("sm").children.at("transitions") ==
              std::vector<std::string>{"tback@b1", "tin", "tout@a1", "tstep"});
        CHECK(flat.links.at("tout.tgt@a1").dst == "b1");
        CHECK(flat.links.at("tback.tgt@b1").dst == "a1");
        CHECK(flat.links.at("tin.src").dst == "a2");
        CHECK(std::get<bool>(flat.objects.at("a1").attributes.at("initial")));
        CHECK(simulate(chart(), {"e", "f", "f", "e"}) == std::vector<std::string>{"b1", "a1", "a2", "a1"});
    }

    TEST_CASE("nondeterminism is reported") {
        auto m = toggle();
        m.objects.emplace("t3", MObject{"t3", "Transition", {{"event", std::string("t")}}, {}});
        m.objects.at("sm").children.at("transitions").push_back("t3");
        m.links.emplace("t3.s", MLink{"t3.s", "TransitionSource", "t3", "s1"});
        m.links.emplace("t3.t", MLink{"t3.t", "TransitionTarget", "t3", "s1"});
        CHECK(code_of([&] { simulate(m, {"t"}); }) == ErrorCode::Nondeterministic);
    }

    TEST_CASE("flattening preserves traces on random machines") {
        Rng rng(23);
        auto words = all_words(5);
        REQUIRE(words.size() == 62);
        for (int i = 0; i < 15; ++i) {
            auto m = random_statechart(rng);
            auto flat = flatten_statechart(m);
            CHECK(check_conformance(flat, flat_statechart_metamodel()).conformant());
            for (const auto& w : words) CHECK(simulate(m, w) == simulate(flat, w));
        }
    }
}
