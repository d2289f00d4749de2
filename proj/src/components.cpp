#include <algorithm>
#include <deque>
#include <map>

#include "evolvekit/error.hpp"
#include "evolvekit/io.hpp"
#include "evolvekit/refactor.hpp"

namespace evolvekit::refactor {

namespace data {
extern const char* const kComponents;
extern const char* const kStatechart;
extern const char* const kFlatStatechart;
}  // namespace data

const Metamodel& components_metamodel() {
    static const Metamodel mm = load_metamodel(data::kComponents);
    return mm;
}

const Metamodel& statechart_metamodel() {
    static const Metamodel mm = load_metamodel(data::kStatechart);
    return mm;
}

const Metamodel& flat_statechart_metamodel() {
    static const Metamodel mm = load_metamodel(data::kFlatStatechart);
    return mm;
}

namespace {

constexpr const char* kChannel = "Channel";

std::string parent_of(const Model& m, const std::string& id) {
    for (const auto& [pid, obj] : m.objects)
        for (const auto& [role, kids] : obj.children)
            if (std::find(kids.begin(), kids.end(), id) != kids.end()) return pid;
    return "";
}

bool components_local(const Model& m, const std::string& a, const std::string& b) {
    if (a == b) return true;
    std::string pa = parent_of(m, a), pb = parent_of(m, b);
    return pa == pb || pa == b || pb == a;
}

std::string fresh_id(const Model& m, const std::string& prefix) {
    for (std::size_t n = 0;; ++n) {
        std::string id = prefix + "/" + std::to_string(n);
        if (!m.objects.count(id) && !m.links.count(id)) return id;
    }
}

const MObject& component(const Model& m, const std::string& id) {
    const MObject* obj = m.find(id);
    if (!obj || obj->className != "Component") throw Error(ErrorCode::IdUnknown, "no component '" + id + "'");
    return *obj;
}

void detach(Model& m, const std::string& id, const std::string& parent) {
    auto& list = parent.empty() ? m.roots : m.objects.at(parent).children["sub"];
    list.erase(std::remove(list.begin(), list.end(), id), list.end());
}

void attach(Model& m, const std::string& id, const std::string& parent) {
    (parent.empty() ? m.roots : m.objects.at(parent).children["sub"]).push_back(id);
    m.normalize();
}

bool local_ports(const Model& m, const std::string& p, const std::string& q) {
    return components_local(m, owner_of(m, p), owner_of(m, q));
}

bool has_channel(const Model& m, const std::string& src, const std::string& dst) {
    return std::any_of(m.links.begin(), m.links.end(), [&](const auto& kv) {
        return kv.second.association == kChannel && kv.second.src == src && kv.second.dst == dst;
    });
}

/// Splits every non-local channel of `moved` through a new port on `boundary`.
/// `inside` tells whether `moved` now sits inside `boundary`.
void split_channels(Model& m, const std::string& moved, const std::string& boundary, bool inside) {
    std::vector<std::string> ids;
    for (const auto& [id, link] : m.links) ids.push_back(id);
    for (const auto& id : ids) {
        MLink link = m.links.at(id);
        if (link.association != kChannel) continue;
        bool fromMoved = owner_of(m, link.src) == moved;
        bool toMoved = owner_of(m, link.dst) == moved;
        if ((!fromMoved && !toMoved) || channel_is_local(m, link)) continue;
        // Traffic leaving an inner component goes out of the boundary, and so on.
        bool outward = fromMoved == inside;
        std::string port = fresh_id(m, boundary + "/bp");
        m.objects.emplace(port, MObject{port, "Port", {{"direction", std::string(outward ? "out" : "in")}}, {}});
        m.objects.at(boundary).children["ports"].push_back(port);
        std::string other = fresh_id(m, boundary + "/bc");
        // The half touching the moved component keeps the channel's id.
        if (fromMoved) {
            m.links[id].dst = port;
            m.links.emplace(other, MLink{other, kChannel, port, link.dst});
        } else {
            m.links[id].src = port;
            m.links.emplace(other, MLink{other, kChannel, link.src, port});
        }
    }
    m.normalize();
}

/// Replaces channels between `moved` and a generated port by direct channels,
/// as long as every replacement is local. Reachability is unchanged.
void merge_channels(Model& m, const std::string& moved) {
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [id, link] : m.links) {
            if (link.association != kChannel) continue;
            bool fromMoved = owner_of(m, link.src) == moved && is_generated_port(link.dst);
            bool toMoved = owner_of(m, link.dst) == moved && is_generated_port(link.src);
            if (!fromMoved && !toMoved) continue;
            const std::string relay = fromMoved ? link.dst : link.src;
            const std::string mine = fromMoved ? link.src : link.dst;
            if (relay == mine || owner_of(m, relay) == moved) continue;
            std::vector<std::string> others;  // ports beyond the relay, in channel-id order
            for (const auto& [oid, o] : m.links) {
                if (o.association != kChannel || oid == id) continue;
                if (fromMoved && o.src == relay) others.push_back(o.dst);
                if (toMoved && o.dst == relay) others.push_back(o.src);
            }
            if (others.empty()) continue;
            if (!std::all_of(others.begin(), others.end(), [&](const std::string& p) { return local_ports(m, mine, p); }))
                continue;
            std::string keep = id;
            std::string relayOwner = owner_of(m, relay);
            m.links.erase(id);
            bool reused = false;
            for (const auto& p : others) {
                std::string s = fromMoved ? mine : p;
                std::string d = fromMoved ? p : mine;
                if (has_channel(m, s, d)) continue;
                std::string nid = reused ? fresh_id(m, relayOwner + "/bc") : keep;
                reused = true;
                m.links.emplace(nid, MLink{nid, kChannel, s, d});
            }
            changed = true;
            break;
        }
    }
}

Model reroute(Model m, const std::string& moved, const std::string& boundary, bool inside) {
    split_channels(m, moved, boundary, inside);
    merge_channels(m, moved);
    return collect_generated_ports(m);
}

}  // namespace

std::string owner_of(const Model& m, const std::string& portId) {
    const MObject* port = m.find(portId);
    return port && port->className == "Port" ? parent_of(m, portId) : std::string();
}

bool channel_is_local(const Model& m, const MLink& channel) { return local_ports(m, channel.src, channel.dst); }

bool is_generated_port(const std::string& portId) { return portId.find("/bp/") != std::string::npos; }

Model push_down(const Model& m, const std::string& componentId, const std::string& containerId) {
    component(m, componentId);
    component(m, containerId);
    std::string parent = parent_of(m, componentId);
    if (componentId == containerId || parent != parent_of(m, containerId))
        throw Error(ErrorCode::NotSiblings, "'" + componentId + "' and '" + containerId + "' are not siblings");
    Model out = m;
    detach(out, componentId, parent);
    attach(out, componentId, containerId);
    return reroute(std::move(out), componentId, containerId, true);
}

Model pull_up(const Model& m, const std::string& componentId) {
    component(m, componentId);
    std::string container = parent_of(m, componentId);
    if (container.empty()) throw Error(ErrorCode::AtRoot, "'" + componentId + "' has no container");
    Model out = m;
    detach(out, componentId, container);
    attach(out, componentId, parent_of(m, container));
    return reroute(std::move(out), componentId, container, false);
}

Model collect_generated_ports(const Model& input) {
    Model m = input;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [id, obj] : m.objects) {
            if (obj.className != "Port" || !is_generated_port(id)) continue;
            bool in = false, out = false;
            for (const auto& [lid, l] : m.links) {
                in = in || (l.association == kChannel && l.dst == id && l.src != id);
                out = out || (l.association == kChannel && l.src == id && l.dst != id);
            }
            if (in && out) continue;
            std::erase_if(m.links, [&](const auto& kv) { return kv.second.src == id || kv.second.dst == id; });
            std::string owner = owner_of(m, id);
            if (!owner.empty()) {
                auto& ports = m.objects.at(owner).children["ports"];
                ports.erase(std::remove(ports.begin(), ports.end(), id), ports.end());
            }
            std::erase(m.roots, id);
            m.objects.erase(id);
            changed = true;
            break;
        }
    }
    m.normalize();
    return m;
}

Connectivity flattened_connectivity(const Model& m) {
    auto parents = parent_index(m);
    auto is_leaf_port = [&](const std::string& port) {
        auto p = parents.find(port);
        if (p == parents.end()) return true;
        const MObject* owner = m.find(p->second.parent);
        auto sub = owner->children.find("sub");
        return sub == owner->children.end() || sub->second.empty();
    };
    std::map<std::string, std::vector<std::string>> next;
    for (const auto& [id, l] : m.links)
        if (l.association == kChannel) next[l.src].push_back(l.dst);

    Connectivity out;
    for (const auto& [id, obj] : m.objects) {
        if (obj.className != "Port" || !is_leaf_port(id)) continue;
        std::set<std::string> seen;
        std::deque<std::string> todo{id};
        while (!todo.empty()) {
            std::string cur = todo.front();
            todo.pop_front();
            for (const auto& q : next[cur]) {
                if (is_leaf_port(q)) {
                    out.insert({id, q});
                } else if (seen.insert(q).second) {
                    todo.push_back(q);
                }
            }
        }
    }
    return out;
}

}  // namespace evolvekit::refactor
