#include "oracles.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evolvekit::testing {

std::string corpus_path(const std::string& name) { return std::string(EVOLVEKIT_SOURCE_DIR) + "/tests/corpus/" + name; }

std::string read_corpus(const std::string& name) {
    std::ifstream in(corpus_path(name), std::ios::binary);
    if (!in) throw std::runtime_error("missing corpus file " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(uniform(rng, 0, int(xs.size()) - 1))];
}

const std::string& str(const MObject& o, const std::string& attr) { return std::get<std::string>(o.attributes.at(attr)); }
std::int64_t num(const MObject& o, const std::string& attr) { return std::get<std::int64_t>(o.attributes.at(attr)); }

std::vector<std::string> kids(const MObject& o, const std::string& role) {
    auto it = o.children.find(role);
    return it == o.children.end() ? std::vector<std::string>{} : it->second;
}

}  // namespace

Model random_oracle_model(Rng& rng, int maxObjects) {
    Model m;
    m.metamodelName = "Oracle";
    m.metamodelVersion = "v1";
    int total = uniform(rng, 1, maxObjects);
    int nc = uniform(rng, 1, std::max(1, total / 3));
    std::vector<std::string> comps, ports;
    for (int i = 0; i < nc; ++i) {
        std::string id = "c" + std::to_string(i);
        m.objects.emplace(id, MObject{id, "Component", {{"name", id}, {"prio", std::int64_t{uniform(rng, 0, 9)}}}, {}});
        if (i == 0 || coin(rng, 0.3)) {
            m.roots.push_back(id);
        } else {
            m.objects.at(pick(rng, comps)).children["sub"].push_back(id);
        }
        comps.push_back(id);
    }
    static const std::vector<std::string> names{"x", "y", "z"};
    for (int i = 0; i < total - nc; ++i) {
        std::string id = "p" + std::to_string(i);
        m.objects.emplace(id, MObject{id, "Port",
                                      {{"name", pick(rng, names)},
                                       {"width", std::int64_t{uniform(rng, 0, 9)}},
                                       {"kind", std::string(coin(rng) ? "a" : "b")}},
                                      {}});
        m.objects.at(pick(rng, comps)).children["ports"].push_back(id);
        ports.push_back(id);
    }
    std::set<std::pair<std::string, std::string>> wired;
    for (int k = 0; !ports.empty() && k < 8; ++k) {
        auto pair = std::make_pair(pick(rng, ports), pick(rng, ports));
        if (!wired.insert(pair).second) continue;
        std::string id = "w" + std::to_string(k);
        m.links.emplace(id, MLink{id, "Wire", pair.first, pair.second});
    }
    m.validate();
    return m;
}

Counterexamples brute_force_counterexamples(const Model& m) {
    Counterexamples out;
    for (const char* name : {"UniquePortNames", "WidthRange", "HasKindA", "WireWidth", "BusyHasPorts"}) out[name];
    for (const auto& [c, co] : m.objects) {
        if (co.className != "Component") continue;
        auto ports = kids(co, "ports");
        for (const auto& p1 : ports)
            for (const auto& p2 : ports)
                if (p1 != p2 && str(m.objects.at(p1), "name") == str(m.objects.at(p2), "name"))
                    out["UniquePortNames"].push_back({c, p1, p2});
        bool hasA = std::any_of(ports.begin(), ports.end(), [&](const std::string& p) { return str(m.objects.at(p), "kind") == "a"; });
        if (!ports.empty() && !hasA) out["HasKindA"].push_back({c});
        if (num(co, "prio") > 5 && ports.empty()) out["BusyHasPorts"].push_back({c});
    }
    for (const auto& [p, po] : m.objects) {
        if (po.className != "Port") continue;
        if (num(po, "width") < 1 || num(po, "width") > 8) out["WidthRange"].push_back({p});
        for (const auto& [lid, l] : m.links)
            if (l.src == p && num(po, "width") != num(m.objects.at(l.dst), "width")) out["WireWidth"].push_back({p, l.dst});
    }
    for (auto& [name, list] : out) std::sort(list.begin(), list.end());
    return out;
}

std::set<std::pair<std::string, std::string>> attribute_edits_by_id(const Model& a, const Model& b) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [id, oa] : a.objects) {
        auto it = b.objects.find(id);
        if (it == b.objects.end()) continue;
        const auto& ob = it->second;
        for (const auto& [k, v] : oa.attributes) {
            auto jt = ob.attributes.find(k);
            if (jt == ob.attributes.end() || jt->second != v) out.insert({id, k});
        }
        for (const auto& [k, v] : ob.attributes)
            if (!oa.attributes.count(k)) out.insert({id, k});
    }
    return out;
}

Model apply_script(Model m, const EditScript& script) {
    for (const auto& op : script) {
        switch (op.kind) {
            case EditOp::Kind::SetAttr: m.objects.at(op.id).attributes[op.attr] = op.value; break;
            case EditOp::Kind::DeleteObject:
                for (auto& [id, o] : m.objects)
                    for (auto& [role, list] : o.children) std::erase(list, op.id);
                std::erase(m.roots, op.id);
                m.objects.erase(op.id);
                std::erase_if(m.links, [&](const auto& kv) { return kv.second.src == op.id || kv.second.dst == op.id; });
                break;
            case EditOp::Kind::AddObject:
                m.objects.emplace(op.id, op.object);
                m.objects.at(op.parent).children[op.role].push_back(op.id);
                break;
            case EditOp::Kind::AddLink: m.links.emplace(op.id, op.link); break;
            case EditOp::Kind::RemoveLink: m.links.erase(op.id); break;
        }
    }
    m.validate();
    return m;
}

EditScript random_script(const Model& base, const Metamodel& mm, const std::set<std::string>& owned,
                         const std::string& prefix, Rng& rng) {
    EditScript script;
    Model cur = base;
    const bool deleting = coin(rng);
    auto alive = [&] {
        std::vector<std::string> ids;
        for (const auto& id : owned)
            if (cur.objects.count(id)) ids.push_back(id);
        for (const auto& [id, o] : cur.objects)
            if (id.rfind(prefix, 0) == 0) ids.push_back(id);
        return ids;
    };
    auto mine = [&](const std::string& id) { return owned.count(id) || id.rfind(prefix, 0) == 0; };
    int nOps = uniform(rng, 1, 4);
    int fresh = 0;
    for (int attempt = 0; attempt < 40 && int(script.size()) < nOps; ++attempt) {
        auto ids = alive();
        if (ids.empty()) break;
        EditOp op;
        switch (uniform(rng, 0, 3)) {
            case 0: {
                const MObject& o = cur.objects.at(pick(rng, ids));
                std::vector<std::string> strs;
                for (const auto& [k, v] : o.attributes)
                    if (std::holds_alternative<std::string>(v) && !mm.find_attribute(o.className, k)->type.enumValues.size())
                        strs.push_back(k);
                if (strs.empty()) continue;
                op.kind = EditOp::Kind::SetAttr;
                op.id = o.id;
                op.attr = pick(rng, strs);
                op.value = std::get<std::string>(o.attributes.at(op.attr)) + prefix.substr(0, 1);
                break;
            }
            case 1: {
                if (deleting) {
                    const std::string& id = pick(rng, ids);
                    const MObject& o = cur.objects.at(id);
                    bool leaf = o.children.empty() && std::find(cur.roots.begin(), cur.roots.end(), id) == cur.roots.end();
                    bool linksMine = std::all_of(cur.links.begin(), cur.links.end(), [&](const auto& kv) {
                        return (kv.second.src != id && kv.second.dst != id) || (mine(kv.second.src) && mine(kv.second.dst));
                    });
                    if (!leaf || !linksMine) continue;
                    op.kind = EditOp::Kind::DeleteObject;
                    op.id = id;
                } else {
                    const MObject& parent = cur.objects.at(pick(rng, ids));
                    auto roles = mm.all_containments(parent.className);
                    if (roles.empty()) continue;
                    const MContainment* role = pick(rng, roles);
                    auto kinds = concrete_subtypes(mm, role->childClass);
                    if (kinds.empty()) continue;
                    op.kind = EditOp::Kind::AddObject;
                    op.id = prefix + "n" + std::to_string(fresh++);
                    op.parent = parent.id;
                    op.role = role->role;
                    op.object = MObject{op.id, pick(rng, kinds), {}, {}};
                    for (const auto* a : mm.all_attributes(op.object.className))
                        if (a->required) op.object.attributes[a->name] = random_value(a->type, rng);
                }
                break;
            }
            case 2: {
                if (mm.associations.empty()) continue;
                const auto& as = pick(rng, mm.associations);
                std::vector<std::string> srcs, dsts;
                for (const auto& id : ids) {
                    if (mm.is_subtype(cur.objects.at(id).className, as.srcClass)) srcs.push_back(id);
                    if (mm.is_subtype(cur.objects.at(id).className, as.dstClass)) dsts.push_back(id);
                }
                if (srcs.empty() || dsts.empty()) continue;
                // Links are identified by their ends, so a parallel or
                // re-added link would be indistinguishable from an old one.
                MLink link{prefix + "l" + std::to_string(fresh), as.name, pick(rng, srcs), pick(rng, dsts)};
                auto parallel = [&](const Model& mdl) {
                    return std::any_of(mdl.links.begin(), mdl.links.end(), [&](const auto& kv) {
                        return kv.second.association == link.association && kv.second.src == link.src &&
                               kv.second.dst == link.dst;
                    });
                };
                if (parallel(base) || parallel(cur)) continue;
                ++fresh;
                op.kind = EditOp::Kind::AddLink;
                op.id = link.id;
                op.link = link;
                break;
            }
            default: {
                std::vector<std::string> links;
                for (const auto& [id, l] : cur.links)
                    if (base.links.count(id) && mine(l.src) && mine(l.dst)) links.push_back(id);
                if (links.empty()) continue;
                op.kind = EditOp::Kind::RemoveLink;
                op.id = pick(rng, links);
            }
        }
        cur = apply_script(cur, {op});
        script.push_back(std::move(op));
    }
    return script;
}

}  // namespace evolvekit::testing
