#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "evolvekit/diff.hpp"
#include "evolvekit/error.hpp"

namespace evolvekit::diff {

std::string_view to_string(ConflictKind kind) noexcept {
    switch (kind) {
    case ConflictKind::AttrAttr: return "attr-attr";
    case ConflictKind::DeleteChange: return "delete-change";
    case ConflictKind::MoveMove: return "move-move";
    }
    return "?";
}

namespace {

std::string opt_literal(const std::optional<Literal>& v) { return v ? literal_to_string(*v) : "<unset>"; }

/// Everything one side did relative to the base, keyed by base ids where the
/// object exists in the base.
struct Side {
    std::string name;
    const Model* model = nullptr;
    std::map<std::string, std::string> x2b;
    std::map<std::pair<std::string, std::string>, std::optional<Literal>> attrs;
    std::set<std::string> deleted;
    std::map<std::string, ParentRef> moves;  // base id -> new parent (side id; empty = root)
    std::vector<std::string> added;          // side ids
    std::set<std::string> linksRemoved;      // base link ids
    std::vector<std::string> linksAdded;     // side link ids
    std::map<std::string, std::string> mergedId;  // side id of added object -> merged id
};

Side collect(const std::string& name, const Model& base, const Model& x, const Matching& m) {
    Side s;
    s.name = name;
    s.model = &x;
    for (const auto& p : m.pairs) s.x2b[p.right] = p.left;
    DiffReport d = diff_models(base, x, m);
    for (const auto& c : d.changed) s.attrs[{c.leftId, c.attr}] = c.newValue;
    s.deleted.insert(d.removed.begin(), d.removed.end());
    for (const auto& mv : d.moved) s.moves[mv.leftId] = ParentRef{mv.newParent, mv.newRole};
    s.added = d.added;
    s.linksRemoved.insert(d.linkRemoved.begin(), d.linkRemoved.end());
    s.linksAdded = d.linkAdded;
    return s;
}

class Merger {
public:
    Merger(const Model& base, Side& left, Side& right) : base_(base), left_(left), right_(right) {}

    MergeResult run() {
        merged_ = base_;
        allocate_ids();
        resolve_attributes();
        resolve_moves();
        protect_references(left_, right_);
        protect_references(right_, left_);
        place_objects();
        apply_deletions();
        merge_links();
        merged_.validate();
        std::sort(conflicts_.begin(), conflicts_.end(), [](const Conflict& a, const Conflict& b) {
            return std::tie(a.baseId, a.kind, a.detail) < std::tie(b.baseId, b.kind, b.detail);
        });
        conflicts_.erase(std::unique(conflicts_.begin(), conflicts_.end(),
                                     [](const Conflict& a, const Conflict& b) {
                                         return a.baseId == b.baseId && a.kind == b.kind && a.detail == b.detail;
                                     }),
                         conflicts_.end());
        return MergeResult{std::move(merged_), std::move(conflicts_)};
    }

private:
    Side& other(const Side& s) { return &s == &left_ ? right_ : left_; }

    std::string fresh(const std::string& wanted, const std::string& suffix) {
        std::string id = wanted;
        for (int n = 2; used_.count(id); ++n) id = wanted + "~" + suffix + (n > 2 ? std::to_string(n - 1) : "");
        used_.insert(id);
        return id;
    }

    void allocate_ids() {
        for (const auto& [id, o] : base_.objects) used_.insert(id);
        for (const auto& [id, l] : base_.links) used_.insert(id);
        for (Side* s : {&left_, &right_})
            for (const auto& xid : s->added) s->mergedId[xid] = fresh(xid, s->name);
    }

    /// Side object id -> merged object id.
    std::string resolve(const Side& s, const std::string& xid) const {
        if (auto it = s.x2b.find(xid); it != s.x2b.end()) return it->second;
        if (auto it = s.mergedId.find(xid); it != s.mergedId.end()) return it->second;
        return {};
    }

    void conflict(ConflictKind kind, const std::string& baseId, std::string detail) {
        conflicts_.push_back(Conflict{kind, baseId, std::move(detail)});
    }

    /// `deleter` removed `id` while the other side still needs it.
    void retain(const std::string& id, const Side& deleter, const std::string& why) {
        if (!deleter.deleted.count(id)) return;
        retained_.insert(id);
        conflict(ConflictKind::DeleteChange, id, deleter.name + " deleted it, " + why);
    }

    void resolve_attributes() {
        std::set<std::pair<std::string, std::string>> keys;
        for (const auto& [k, v] : left_.attrs) keys.insert(k);
        for (const auto& [k, v] : right_.attrs) keys.insert(k);
        for (const auto& key : keys) {
            const auto& [id, attr] = key;
            auto l = left_.attrs.find(key);
            auto r = right_.attrs.find(key);
            MObject& obj = *merged_.find(id);
            auto baseIt = obj.attributes.find(attr);
            std::optional<Literal> baseV;
            if (baseIt != obj.attributes.end()) baseV = baseIt->second;
            std::optional<Literal> value;
            if (l != left_.attrs.end() && r != right_.attrs.end()) {
                if (l->second != r->second) {
                    conflict(ConflictKind::AttrAttr, id,
                             "attribute '" + attr + "': base=" + opt_literal(baseV) + " left=" +
                                 opt_literal(l->second) + " right=" + opt_literal(r->second));
                    continue;
                }
                value = l->second;
            } else {
                const Side& changer = l != left_.attrs.end() ? left_ : right_;
                const Side& deleter = other(changer);
                if (deleter.deleted.count(id)) {
                    retain(id, deleter, changer.name + " set attribute '" + attr + "' to " +
                                            opt_literal((l != left_.attrs.end() ? l : r)->second));
                    continue;
                }
                value = (l != left_.attrs.end() ? l : r)->second;
            }
            if (value) {
                obj.attributes[attr] = *value;
            } else {
                obj.attributes.erase(attr);
            }
        }
    }

    ParentRef resolved_target(const Side& s, const ParentRef& p) const {
        if (p.parent.empty()) return {};
        return ParentRef{resolve(s, p.parent), p.role};
    }

    void resolve_moves() {
        std::set<std::string> ids;
        for (const auto& [id, p] : left_.moves) ids.insert(id);
        for (const auto& [id, p] : right_.moves) ids.insert(id);
        auto describe = [](const ParentRef& p) { return p.parent.empty() ? std::string("<root>") : p.parent + "." + p.role; };
        for (const auto& id : ids) {
            auto l = left_.moves.find(id);
            auto r = right_.moves.find(id);
            if (l != left_.moves.end() && r != right_.moves.end()) {
                ParentRef tl = resolved_target(left_, l->second);
                ParentRef tr = resolved_target(right_, r->second);
                if (tl.parent != tr.parent || tl.role != tr.role) {
                    conflict(ConflictKind::MoveMove, id,
                             "left moved it under " + describe(tl) + ", right under " + describe(tr));
                    continue;
                }
                moves_[id] = tl;
                continue;
            }
            const Side& mover = l != left_.moves.end() ? left_ : right_;
            const Side& deleter = other(mover);
            ParentRef target = resolved_target(mover, (l != left_.moves.end() ? l : r)->second);
            if (deleter.deleted.count(id)) {
                retain(id, deleter, mover.name + " moved it under " + describe(target));
                continue;
            }
            moves_[id] = target;
        }
    }

    /// Objects the `user` side still references (move targets, parents of its
    /// additions, ends of its new links) survive the other side's deletion.
    void protect_references(Side& user, Side& deleter) {
        for (const auto& [id, target] : user.moves)
            if (!target.parent.empty()) {
                std::string p = resolve(user, target.parent);
                retain(p, deleter, user.name + " moved '" + id + "' into it");
            }
        auto parents = parent_index(*user.model);
        for (const auto& xid : user.added) {
            auto it = parents.find(xid);
            if (it == parents.end()) continue;
            std::string p = resolve(user, it->second.parent);
            retain(p, deleter, user.name + " added '" + user.mergedId[xid] + "' inside it");
        }
        for (const auto& lid : user.linksAdded) {
            const MLink& link = user.model->links.at(lid);
            for (const auto& end : {link.src, link.dst})
                retain(resolve(user, end), deleter, user.name + " linked it through '" + lid + "'");
        }
    }

    void place_objects() {
        std::map<std::string, ParentRef> placement = parent_index(base_);
        for (Side* s : {&left_, &right_}) {
            auto parents = parent_index(*s->model);
            for (const auto& xid : s->added) {
                const MObject& src = s->model->objects.at(xid);
                MObject obj{s->mergedId[xid], src.className, src.attributes, {}};
                merged_.objects.emplace(obj.id, obj);
                auto it = parents.find(xid);
                if (it != parents.end()) placement[obj.id] = ParentRef{resolve(*s, it->second.parent), it->second.role};
            }
        }
        for (const auto& [id, target] : moves_) {
            if (target.parent.empty()) {
                placement.erase(id);
            } else {
                placement[id] = target;
            }
        }
        for (auto& [id, obj] : merged_.objects) obj.children.clear();
        merged_.roots.clear();
        for (const auto& [id, obj] : merged_.objects) {
            auto it = placement.find(id);
            if (it == placement.end()) {
                merged_.roots.push_back(id);
            } else {
                merged_.objects.at(it->second.parent).children[it->second.role].push_back(id);
            }
        }
        merged_.normalize();
    }

    void apply_deletions() {
        std::set<std::string> doomed;
        for (const Side* s : {&left_, &right_})
            for (const auto& id : s->deleted)
                if (!retained_.count(id)) doomed.insert(id);
        // A deleted object may still contain something that survives; keep it then.
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = doomed.begin(); it != doomed.end();) {
                std::string keeper;
                for (const auto& [role, kids] : merged_.objects.at(*it).children)
                    for (const auto& kid : kids)
                        if (!doomed.count(kid) && keeper.empty()) keeper = kid;
                if (!keeper.empty()) {
                    const Side& deleter = left_.deleted.count(*it) ? left_ : right_;
                    conflict(ConflictKind::DeleteChange, *it,
                             deleter.name + " deleted it, but it still contains retained object '" + keeper + "'");
                    it = doomed.erase(it);
                    changed = true;
                } else {
                    ++it;
                }
            }
        }
        for (const auto& id : doomed) merged_.objects.erase(id);
        for (auto& [id, obj] : merged_.objects)
            for (auto& [role, kids] : obj.children)
                kids.erase(std::remove_if(kids.begin(), kids.end(), [&](const std::string& k) { return doomed.count(k) > 0; }),
                           kids.end());
        merged_.roots.erase(std::remove_if(merged_.roots.begin(), merged_.roots.end(),
                                           [&](const std::string& k) { return doomed.count(k) > 0; }),
                            merged_.roots.end());
        merged_.normalize();
    }

    void merge_links() {
        for (auto it = merged_.links.begin(); it != merged_.links.end();) {
            const MLink& l = it->second;
            bool gone = left_.linksRemoved.count(l.id) || right_.linksRemoved.count(l.id) ||
                        !merged_.find(l.src) || !merged_.find(l.dst);
            it = gone ? merged_.links.erase(it) : std::next(it);
        }
        // The same link added on both sides is merged once; parallel links
        // added by one side are kept as they are.
        std::multiset<std::tuple<std::string, std::string, std::string>> byLeft;
        for (Side* s : {&left_, &right_}) {
            for (const auto& lid : s->linksAdded) {
                const MLink& src = s->model->links.at(lid);
                MLink link{"", src.association, resolve(*s, src.src), resolve(*s, src.dst)};
                if (!merged_.find(link.src) || !merged_.find(link.dst)) continue;
                auto key = std::make_tuple(link.association, link.src, link.dst);
                if (s == &left_) {
                    byLeft.insert(key);
                } else if (auto twin = byLeft.find(key); twin != byLeft.end()) {
                    byLeft.erase(twin);
                    continue;
                }
                link.id = fresh(lid, s->name);
                merged_.links.emplace(link.id, link);
            }
        }
    }

    const Model& base_;
    Side& left_;
    Side& right_;
    Model merged_;
    std::set<std::string> used_;
    std::set<std::string> retained_;
    std::map<std::string, ParentRef> moves_;
    std::vector<Conflict> conflicts_;
};

/// Objects that kept their id and class on a side are the same object; the
/// similarity matcher only pairs up the rest.
Matching anchored_matching(const Model& base, const Model& side, const MatchConfig& cfg) {
    Matching out = match_by_id(base, side);
    std::set<std::string> usedL, usedR;
    for (const auto& p : out.pairs) {
        usedL.insert(p.left);
        usedR.insert(p.right);
    }
    Matching similar = match_models(base, side, cfg);
    for (const auto& p : similar.pairs)
        if (!usedL.count(p.left) && !usedR.count(p.right)) out.pairs.push_back(p);
    std::sort(out.pairs.begin(), out.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.left < b.left; });
    out.config = similar.config;
    out.iterations = similar.iterations;
    return out;
}

}  // namespace

MergeResult merge3(const Model& base, const Model& left, const Model& right, const MatchConfig& cfg) {
    for (const Model* m : {&left, &right})
        if (m->metamodelName != base.metamodelName)
            throw Error(ErrorCode::MetamodelMismatch,
                        "base is a '" + base.metamodelName + "' model, got a '" + m->metamodelName + "' model");
    Side l = collect("left", base, left, anchored_matching(base, left, cfg));
    Side r = collect("right", base, right, anchored_matching(base, right, cfg));
    return Merger(base, l, r).run();
}

std::string render_merge_text(const MergeResult& result) {
    std::ostringstream out;
    for (const auto& c : result.conflicts) out << "CONFLICT " << to_string(c.kind) << " " << c.baseId << ": " << c.detail << "\n";
    if (result.conflicts.empty()) {
        out << "merged without conflicts (" << result.merged.objects.size() << " objects, " << result.merged.links.size()
            << " links)\n";
    } else {
        out << result.conflicts.size() << " conflict(s); base values retained\n";
    }
    return out.str();
}

Json merge_to_json(const MergeResult& result) {
    Json conflicts = Json::array();
    for (const auto& c : result.conflicts)
        conflicts.push_back({{"kind", std::string(to_string(c.kind))}, {"baseId", c.baseId}, {"detail", c.detail}});
    return {{"conflicts", std::move(conflicts)}, {"merged", model_to_json(result.merged)}};
}

}  // namespace evolvekit::diff
