#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "evolvekit/diff.hpp"

namespace evolvekit::diff {

bool DiffReport::empty() const {
    return added.empty() && removed.empty() && changed.empty() && moved.empty() && linkAdded.empty() &&
           linkRemoved.empty();
}

DiffReport diff_models(const Model& left, const Model& right, const Matching& matching) {
    DiffReport out;
    std::map<std::string, std::string> l2r, r2l;
    for (const auto& p : matching.pairs) {
        l2r[p.left] = p.right;
        r2l[p.right] = p.left;
    }
    for (const auto& [id, obj] : left.objects)
        if (!l2r.count(id)) out.removed.push_back(id);
    for (const auto& [id, obj] : right.objects)
        if (!r2l.count(id)) out.added.push_back(id);

    auto lParents = parent_index(left);
    auto rParents = parent_index(right);
    for (const auto& [lid, rid] : l2r) {
        const MObject* a = left.find(lid);
        const MObject* b = right.find(rid);
        if (!a || !b) continue;
        std::set<std::string> names;
        for (const auto& [k, v] : a->attributes) names.insert(k);
        for (const auto& [k, v] : b->attributes) names.insert(k);
        for (const auto& n : names) {
            auto ia = a->attributes.find(n);
            auto ib = b->attributes.find(n);
            std::optional<Literal> oldV, newV;
            if (ia != a->attributes.end()) oldV = ia->second;
            if (ib != b->attributes.end()) newV = ib->second;
            if (oldV != newV) out.changed.push_back({lid, rid, n, oldV, newV});
        }

        auto pl = lParents.find(lid);
        auto pr = rParents.find(rid);
        std::string oldParent = pl == lParents.end() ? "" : pl->second.parent;
        std::string newParent = pr == rParents.end() ? "" : pr->second.parent;
        std::string oldRole = pl == lParents.end() ? "" : pl->second.role;
        std::string newRole = pr == rParents.end() ? "" : pr->second.role;
        bool same;
        if (oldParent.empty() || newParent.empty()) {
            same = oldParent.empty() && newParent.empty();
        } else {
            auto mapped = l2r.find(oldParent);
            same = mapped != l2r.end() && mapped->second == newParent && oldRole == newRole;
        }
        if (!same) out.moved.push_back({lid, rid, oldParent, newParent, oldRole, newRole});
    }

    // Links correspond when their association and mapped endpoints agree. Among
    // parallel links, those that kept their id pair up first.
    std::multimap<std::tuple<std::string, std::string, std::string>, std::string> rightLinks;
    for (const auto& [id, link] : right.links) rightLinks.emplace(std::make_tuple(link.association, link.src, link.dst), id);
    auto key_of = [&](const MLink& link) -> std::optional<std::tuple<std::string, std::string, std::string>> {
        auto s = l2r.find(link.src);
        auto d = l2r.find(link.dst);
        if (s == l2r.end() || d == l2r.end()) return std::nullopt;
        return std::make_tuple(link.association, s->second, d->second);
    };
    std::vector<std::string> unpaired;
    for (const auto& [id, link] : left.links) {
        auto key = key_of(link);
        if (key) {
            auto [lo, hi] = rightLinks.equal_range(*key);
            auto it = std::find_if(lo, hi, [&](const auto& kv) { return kv.second == id; });
            if (it != hi) {
                rightLinks.erase(it);
                continue;
            }
        }
        unpaired.push_back(id);
    }
    for (const auto& id : unpaired) {
        auto key = key_of(left.links.at(id));
        if (key) {
            if (auto it = rightLinks.find(*key); it != rightLinks.end()) {
                rightLinks.erase(it);
                continue;
            }
        }
        out.linkRemoved.push_back(id);
    }
    for (const auto& [key, id] : rightLinks) out.linkAdded.push_back(id);
    std::sort(out.linkAdded.begin(), out.linkAdded.end());
    return out;
}

namespace {

std::string opt_literal(const std::optional<Literal>& v) { return v ? literal_to_string(*v) : "<unset>"; }

Json opt_json(const std::optional<Literal>& v) { return v ? literal_to_json(*v) : Json(nullptr); }

}  // namespace

std::string render_diff_text(const DiffReport& r) {
    std::ostringstream out;
    for (const auto& id : r.removed) out << "- object " << id << "\n";
    for (const auto& id : r.added) out << "+ object " << id << "\n";
    for (const auto& c : r.changed)
        out << "~ " << c.leftId << (c.leftId == c.rightId ? "" : " -> " + c.rightId) << "." << c.attr << ": "
            << opt_literal(c.oldValue) << " -> " << opt_literal(c.newValue) << "\n";
    for (const auto& m : r.moved)
        out << "> " << m.leftId << (m.leftId == m.rightId ? "" : " -> " + m.rightId) << ": "
            << (m.oldParent.empty() ? "<root>" : m.oldParent + "." + m.oldRole) << " -> "
            << (m.newParent.empty() ? "<root>" : m.newParent + "." + m.newRole) << "\n";
    for (const auto& id : r.linkRemoved) out << "- link " << id << "\n";
    for (const auto& id : r.linkAdded) out << "+ link " << id << "\n";
    if (r.empty()) out << "no differences\n";
    return out.str();
}

Json diff_to_json(const DiffReport& r) {
    Json changed = Json::array();
    for (const auto& c : r.changed)
        changed.push_back({{"leftId", c.leftId},
                           {"rightId", c.rightId},
                           {"attr", c.attr},
                           {"oldValue", opt_json(c.oldValue)},
                           {"newValue", opt_json(c.newValue)}});
    Json moved = Json::array();
    for (const auto& m : r.moved)
        moved.push_back({{"leftId", m.leftId},
                         {"rightId", m.rightId},
                         {"oldParent", m.oldParent},
                         {"newParent", m.newParent},
                         {"oldRole", m.oldRole},
                         {"newRole", m.newRole}});
    return {{"added", r.added},
            {"removed", r.removed},
            {"changed", std::move(changed)},
            {"moved", std::move(moved)},
            {"linkAdded", r.linkAdded},
            {"linkRemoved", r.linkRemoved}};
}

}  // namespace evolvekit::diff
