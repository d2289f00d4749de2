#include <algorithm>
#include <map>
#include <set>

#include "evolvekit/conformance.hpp"
#include "evolvekit/error.hpp"
#include "evolvekit/refactor.hpp"

namespace evolvekit::refactor {

namespace {

[[noreturn]] void illformed(const std::string& what) { throw Error(ErrorCode::IllformedStatechart, what); }

struct Transition {
    std::string id;
    std::string event;
    std::string source, target;
    std::string sourceLink, targetLink;
};

/// Read-only index of a validated statechart.
struct Chart {
    std::string machine;
    std::string initial;                                  // top-level initial state
    std::map<std::string, std::string> parent;            // state -> enclosing state ("" at top level)
    std::map<std::string, std::vector<std::string>> substates;
    std::map<std::string, std::string> initialChild;
    std::map<std::string, std::vector<Transition>> outgoing;  // by source state, transition-id order

    std::string initial_leaf(std::string s) const {
        for (auto it = initialChild.find(s); it != initialChild.end(); it = initialChild.find(s)) s = it->second;
        return s;
    }

    std::vector<std::string> leaves() const {
        std::vector<std::string> out;
        for (const auto& [s, p] : parent)
            if (!substates.count(s)) out.push_back(s);
        return out;
    }
};

bool is_initial(const MObject& state) {
    auto it = state.attributes.find("initial");
    return it != state.attributes.end() && std::get<bool>(it->second);
}

const std::vector<std::string>& kids(const MObject& obj, const std::string& role) {
    static const std::vector<std::string> none;
    auto it = obj.children.find(role);
    return it == obj.children.end() ? none : it->second;
}

Chart index(const Model& m) {
    const Metamodel* mm = m.metamodelName == statechart_metamodel().name        ? &statechart_metamodel()
                          : m.metamodelName == flat_statechart_metamodel().name ? &flat_statechart_metamodel()
                                                                                : nullptr;
    if (!mm) illformed("'" + m.metamodelName + "' is not a statechart metamodel");
    auto report = check_conformance(m, *mm);
    if (!report.conformant()) {
        const auto& v = report.violations.front();
        illformed(std::string(to_string(v.code)) + " " + v.elementId + ": " + v.message);
    }
    if (m.roots.size() != 1 || m.objects.at(m.roots.front()).className != "StateMachine")
        illformed("a statechart has exactly one root StateMachine");

    Chart c;
    c.machine = m.roots.front();
    // Walk levels: one initial state per level.
    std::vector<std::pair<std::string, std::vector<std::string>>> levels{{"", kids(m.objects.at(c.machine), "states")}};
    while (!levels.empty()) {
        auto [owner, states] = levels.back();
        levels.pop_back();
        std::vector<std::string> initials;
        for (const auto& s : states) {
            c.parent[s] = owner;
            const MObject& obj = m.objects.at(s);
            if (is_initial(obj)) initials.push_back(s);
            const auto& sub = kids(obj, "substates");
            if (!sub.empty()) {
                c.substates[s] = sub;
                levels.push_back({s, sub});
            }
        }
        if (initials.size() != 1)
            illformed((owner.empty() ? std::string("the top level") : "state '" + owner + "'") + " has " +
                      std::to_string(initials.size()) + " initial states, expected 1");
        (owner.empty() ? c.initial : c.initialChild[owner]) = initials.front();
    }

    std::map<std::string, Transition> ts;
    for (const auto& t : kids(m.objects.at(c.machine), "transitions"))
        ts[t] = Transition{t, std::get<std::string>(m.objects.at(t).attributes.at("event")), "", "", "", ""};
    for (const auto& [id, link] : m.links) {
        auto it = ts.find(link.src);
        if (it == ts.end()) continue;
        if (link.association == "TransitionSource") {
            it->second.source = link.dst;
            it->second.sourceLink = id;
        } else if (link.association == "TransitionTarget") {
            it->second.target = link.dst;
            it->second.targetLink = id;
        }
    }
    for (auto& [id, t] : ts) {
        if (!c.parent.count(t.source) || !c.parent.count(t.target))
            illformed("transition '" + id + "' joins states outside the machine");
        c.outgoing[t.source].push_back(std::move(t));
    }
    return c;
}

/// Transitions on `event` at the innermost level, starting from `leaf`.
std::pair<std::string, std::vector<const Transition*>> innermost(const Chart& c, const std::string& leaf,
                                                                 const std::string& event) {
    for (std::string s = leaf; !s.empty(); s = c.parent.at(s)) {
        std::vector<const Transition*> found;
        if (auto it = c.outgoing.find(s); it != c.outgoing.end())
            for (const auto& t : it->second)
                if (t.event == event) found.push_back(&t);
        if (!found.empty()) return {s, found};
    }
    return {"", {}};
}

}  // namespace

void validate_statechart(const Model& m) { index(m); }

Model flatten_statechart(const Model& m) {
    Chart c = index(m);
    const auto& flat = flat_statechart_metamodel();
    Model out;
    out.metamodelName = flat.name;
    out.metamodelVersion = flat.version;
    out.roots = {c.machine};
    MObject machine = m.objects.at(c.machine);
    machine.children.clear();

    std::string start = c.initial_leaf(c.initial);
    for (const auto& leaf : c.leaves()) {
        MObject state = m.objects.at(leaf);
        state.children.clear();
        if (leaf == start) {
            state.attributes["initial"] = true;
        } else if (state.attributes.count("initial")) {
            state.attributes["initial"] = false;
        }
        machine.children["states"].push_back(leaf);
        out.objects.emplace(leaf, std::move(state));

        std::set<std::string> events;
        for (std::string s = leaf; !s.empty(); s = c.parent.at(s))
            if (auto it = c.outgoing.find(s); it != c.outgoing.end())
                for (const auto& t : it->second) events.insert(t.event);
        for (const auto& e : events) {
            auto [level, found] = innermost(c, leaf, e);
            std::string suffix = level == leaf ? "" : "@" + leaf;
            for (const auto* t : found) {
                std::string id = t->id + suffix;
                MObject obj = m.objects.at(t->id);
                obj.id = id;
                machine.children["transitions"].push_back(id);
                out.objects.emplace(id, std::move(obj));
                out.links.emplace(t->sourceLink + suffix, MLink{t->sourceLink + suffix, "TransitionSource", id, leaf});
                out.links.emplace(t->targetLink + suffix,
                                  MLink{t->targetLink + suffix, "TransitionTarget", id, c.initial_leaf(t->target)});
            }
        }
    }
    out.objects.emplace(c.machine, std::move(machine));
    out.validate();
    return out;
}

std::vector<std::string> simulate(const Model& m, const std::vector<std::string>& events) {
    Chart c = index(m);
    std::string cur = c.initial_leaf(c.initial);
    if (events.empty()) return {cur};
    std::vector<std::string> trace;
    for (const auto& e : events) {
        auto [level, found] = innermost(c, cur, e);
        if (found.size() > 1)
            throw Error(ErrorCode::Nondeterministic, "state '" + level + "' has " + std::to_string(found.size()) +
                                                         " transitions on '" + e + "'");
        if (!found.empty()) cur = c.initial_leaf(found.front()->target);
        trace.push_back(cur);
    }
    return trace;
}

}  // namespace evolvekit::refactor
