#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "evolvekit/mcl.hpp"

namespace evolvekit::mcl {

std::string_view to_string(WarningCode code) noexcept {
    switch (code) {
    case WarningCode::OverlappingConditions: return "OVERLAPPING_CONDITIONS";
    case WarningCode::UnmappedClass: return "UNMAPPED_CLASS";
    case WarningCode::AttrDropped: return "ATTR_DROPPED";
    case WarningCode::DefaultFilled: return "DEFAULT_FILLED";
    }
    return "?";
}

std::size_t MigrationReport::mapped_total() const {
    std::size_t n = 0;
    for (const auto& r : mapped) n += r.count;
    return n;
}

MigrationError::MigrationError(const std::string& message, std::vector<std::string> objects,
                               std::optional<ConformanceReport> conformance)
    : Error(ErrorCode::MigrationIncomplete, message),
      objects_(std::move(objects)),
      conformance_(std::move(conformance)) {}

namespace {

/// Evaluates `a + b + ...` for a target of the given type. Returns nothing when
/// an operand reads an attribute that has no value.
std::optional<Literal> evaluate(const Command& c, const MAttribute& target, const expr::ModelView* srcView,
                                const std::string& srcId, const expr::ModelView* parentView,
                                const std::string& parentId) {
    std::vector<Literal> values;
    for (const auto& op : c.operands) {
        if (op.kind == Operand::Kind::Literal) {
            values.push_back(op.value);
            continue;
        }
        bool fromSrc = op.kind == Operand::Kind::SrcAttr;
        auto v = fromSrc ? srcView->attribute(srcId, op.attr) : parentView->attribute(parentId, op.attr);
        if (!v) return std::nullopt;
        values.push_back(*v);
    }
    switch (target.type.kind) {
    case PrimitiveKind::String:
    case PrimitiveKind::Enum: {
        std::string s;
        for (const auto& v : values) s += std::get<std::string>(v);
        return s;
    }
    case PrimitiveKind::Int: {
        std::int64_t n = 0;
        for (const auto& v : values) n += std::get<std::int64_t>(v);
        return n;
    }
    case PrimitiveKind::Float: {
        double d = 0;
        for (const auto& v : values)
            d += std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int64_t>(v));
        return d;
    }
    case PrimitiveKind::Bool: return values.front();
    }
    return std::nullopt;
}

/// Role under which an object of `childClass` goes into `parentClass`: the
/// previous role if it still fits, else the only (or first by name) fitting one.
std::string resolve_role(const Metamodel& mm, const std::string& parentClass, const std::string& childClass,
                         const std::string& preferred) {
    if (const auto* k = mm.find_containment(parentClass, preferred); k && mm.is_subtype(childClass, k->childClass))
        return preferred;
    std::vector<std::string> fits;
    for (const auto* k : mm.all_containments(parentClass))
        if (mm.is_subtype(childClass, k->childClass)) fits.push_back(k->role);
    if (fits.empty()) return preferred;  // left for the final conformance check
    std::sort(fits.begin(), fits.end());
    return fits.front();
}

class Migrator {
public:
    Migrator(const Model& m, const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst)
        : m_(m), spec_(spec), src_(src), dst_(dst), view_(m, src) {
        for (std::size_t i = 0; i < spec.rules.size(); ++i) {
            const auto* r = std::get_if<MapRule>(&spec.rules[i]);
            if (!r) continue;
            ruleIndex_[r] = i;
            if (r->dstClass) {
                counters_[r] = report_.mapped.size();
                report_.mapped.push_back({i, describe(spec.rules[i]), 0});
            }
        }
        out_.metamodelName = dst.name;
        out_.metamodelVersion = dst.version;
    }

    MigrationResult run() {
        map_objects();
        map_links();
        add_objects();
        out_.validate();
        auto conformance = check_conformance(out_, dst_);
        if (!conformance.conformant()) {
            std::set<std::string> ids;
            for (const auto& v : conformance.violations) ids.insert(v.elementId);
            throw MigrationError("migrated model does not conform to " + dst_.name + " " + dst_.version,
                                 {ids.begin(), ids.end()}, std::move(conformance));
        }
        return {std::move(out_), std::move(report_)};
    }

private:
    void warn(WarningCode code, std::string subject, std::string message) {
        report_.warnings.push_back({code, std::move(subject), std::move(message)});
    }

    void fail_on(std::vector<std::string>& faulty, const std::string& what) {
        if (faulty.empty()) return;
        std::sort(faulty.begin(), faulty.end());
        std::string list;
        for (const auto& id : faulty) list += (list.empty() ? "" : ", ") + id;
        throw MigrationError(what + ": " + list, faulty);
    }

    bool condition_holds(const expr::ExprPtr& cond, const expr::ModelView& view, const std::string& var,
                         const std::string& id) const {
        if (!cond) return true;
        expr::Bindings env{{var, id}};
        return view.holds(*cond, env);
    }

    /// First applicable rule; nullptr when the class has rules but none applies.
    const MapRule* select_rule(const MObject& obj, const std::vector<const MapRule*>& rules) {
        const MapRule* chosen = nullptr;
        for (const auto* r : rules) {
            if (!condition_holds(r->condition, view_, "self", obj.id)) continue;
            if (!chosen) {
                chosen = r;
            } else if (!r->otherwise && overlapWarned_.insert(obj.className).second) {
                warn(WarningCode::OverlappingConditions, obj.className,
                     "object " + obj.id + " satisfies several rules; rule " +
                         std::to_string(ruleIndex_[chosen] + 1) + " applied");
            }
        }
        return chosen;
    }

    void drop(const std::string& id, std::string reason) { report_.dropped.push_back({id, std::move(reason)}); }

    void map_objects() {
        auto parents = parent_index(m_);
        std::vector<std::string> noRule, missing;
        for (const auto& id : preorder(m_)) {
            const MObject& obj = m_.objects.at(id);
            auto rules = spec_.map_rules_for(obj.className);
            const MapRule* rule = rules.empty() ? nullptr : select_rule(obj, rules);
            if (rule && rule->is_delete()) {
                drop(id, "deleted by rule " + std::to_string(ruleIndex_[rule] + 1));
                continue;
            }
            // Deletion cascades to the subtree unless the rule rescues the object.
            auto p = parents.find(id);
            bool rescued = rule && rule->reparent;
            if (p != parents.end() && !rescued && !out_.objects.count(p->second.parent)) {
                drop(id, "container " + p->second.parent + " was not migrated");
                continue;
            }

            std::string dstClass;
            if (rule) {
                dstClass = *rule->dstClass;
            } else if (!rules.empty()) {
                if (!dst_.find_class(obj.className)) {
                    noRule.push_back(id);
                    continue;
                }
                dstClass = obj.className;
            } else if (spec_.identityForUnmapped && dst_.find_class(obj.className)) {
                dstClass = obj.className;
            } else {
                if (unmappedWarned_.insert(obj.className).second)
                    warn(WarningCode::UnmappedClass, obj.className,
                         "no rule for class '" + obj.className + "' and no identity mapping");
                drop(id, "UNMAPPED_CLASS");
                continue;
            }

            // Placement: under the image of the source parent, or of the
            // nearest ancestor of the `reparent` class.
            std::string parentImage, preferredRole;
            if (p != parents.end()) {
                preferredRole = p->second.role;
                parentImage = p->second.parent;
                if (rescued) {
                    std::string anc = p->second.parent;
                    while (!anc.empty() && !src_.is_subtype(m_.objects.at(anc).className, *rule->reparent)) {
                        auto up = parents.find(anc);
                        anc = up == parents.end() ? "" : up->second.parent;
                    }
                    if (anc.empty() || !out_.objects.count(anc))
                        throw MigrationError("object " + id + " has no migrated ancestor of class '" + *rule->reparent + "'",
                                             {id});
                    parentImage = anc;
                }
            }

            MObject image{id, dstClass, {}, {}};
            std::set<std::string> readBySrc;
            if (rule) {
                for (const auto& c : rule->commands) {
                    for (const auto& op : c.operands)
                        if (op.kind == Operand::Kind::SrcAttr) readBySrc.insert(op.attr);
                    const MAttribute* target = dst_.find_attribute(dstClass, c.targetAttr);
                    if (auto v = evaluate(c, *target, &view_, id, nullptr, "")) image.attributes[c.targetAttr] = *v;
                }
            }
            for (const auto& [name, value] : obj.attributes) {
                if (image.attributes.count(name) || rule_assigns(rule, name)) continue;
                const MAttribute* a = dst_.find_attribute(dstClass, name);
                if (a && a->type.accepts(value)) {
                    image.attributes[name] = value;
                } else if (!readBySrc.count(name)) {
                    warn(WarningCode::AttrDropped, id + "." + name,
                         a ? "value " + literal_to_string(value) + " is not a " + a->type.name()
                           : "'" + dstClass + "' declares no attribute '" + name + "'");
                }
            }
            if (!fill_required(image)) missing.push_back(id);

            if (rule) {
                ++report_.mapped[counters_[rule]].count;
            } else {
                report_.identityCarried.push_back(id);
            }
            if (parentImage.empty()) {
                out_.roots.push_back(id);
            } else {
                const MObject& parent = out_.objects.at(parentImage);
                std::string role = resolve_role(dst_, parent.className, dstClass, preferredRole);
                out_.objects.at(parentImage).children[role].push_back(id);
            }
            out_.objects.emplace(id, std::move(image));
        }
        fail_on(noRule, "no applicable rule and no same-named class in the evolved metamodel");
        fail_on(missing, "required attributes without a value or default");
    }

    static bool rule_assigns(const MapRule* rule, const std::string& attr) {
        if (!rule) return false;
        return std::any_of(rule->commands.begin(), rule->commands.end(),
                           [&](const Command& c) { return c.targetAttr == attr; });
    }

    bool fill_required(MObject& obj) {
        bool ok = true;
        for (const auto* a : dst_.all_attributes(obj.className)) {
            if (!a->required || obj.attributes.count(a->name)) continue;
            if (a->defaultValue) {
                obj.attributes[a->name] = *a->defaultValue;
                warn(WarningCode::DefaultFilled, obj.id + "." + a->name,
                     "set to default " + literal_to_string(*a->defaultValue));
            } else {
                ok = false;
            }
        }
        return ok;
    }

    void map_links() {
        std::map<std::string, std::string> renames;
        for (const auto& r : spec_.rules)
            if (const auto* a = std::get_if<AssocRule>(&r)) renames.emplace(a->from, a->to);
        for (const auto& [id, link] : m_.links) {
            const MObject* s = out_.find(link.src);
            const MObject* d = out_.find(link.dst);
            auto rn = renames.find(link.association);
            std::string assoc = rn == renames.end() ? link.association : rn->second;
            const MAssociation* decl = dst_.find_association(assoc);
            std::string reason;
            if (!s || !d) {
                reason = "endpoint " + std::string(!s ? link.src : link.dst) + " was not migrated";
            } else if (!decl) {
                reason = "association '" + assoc + "' does not exist in " + dst_.name;
            } else if (!dst_.is_subtype(s->className, decl->srcClass) || !dst_.is_subtype(d->className, decl->dstClass)) {
                reason = "endpoint classes " + s->className + ", " + d->className + " do not fit '" + assoc + "'";
            }
            if (!reason.empty()) {
                report_.droppedLinks.push_back({id, reason});
                continue;
            }
            out_.links.emplace(id, MLink{id, assoc, link.src, link.dst});
        }
    }

    void add_objects() {
        Model snapshot = out_;
        snapshot.normalize();
        expr::ModelView view(snapshot, dst_);
        std::vector<std::string> missing;
        std::map<std::pair<std::string, std::string>, std::size_t> ordinals;
        auto order = preorder(snapshot);
        for (const auto& r : spec_.rules) {
            const auto* add = std::get_if<AddRule>(&r);
            if (!add) continue;
            for (const auto& pid : order) {
                const MObject& parent = snapshot.objects.at(pid);
                if (!dst_.is_subtype(parent.className, add->containerClass)) continue;
                if (!condition_holds(add->condition, view, "parent", pid)) continue;
                std::string id;
                do {
                    id = pid + "/" + add->newClass + "/" + std::to_string(ordinals[{pid, add->newClass}]++);
                } while (out_.objects.count(id) || out_.links.count(id));
                MObject child{id, add->newClass, {}, {}};
                for (const auto& c : add->commands) {
                    const MAttribute* target = dst_.find_attribute(add->newClass, c.targetAttr);
                    if (auto v = evaluate(c, *target, nullptr, "", &view, pid)) child.attributes[c.targetAttr] = *v;
                }
                if (!fill_required(child)) missing.push_back(id);
                std::string role = resolve_role(dst_, parent.className, add->newClass, "");
                out_.objects.at(pid).children[role].push_back(id);
                out_.objects.emplace(id, std::move(child));
                report_.addedObjects.push_back(id);
            }
        }
        fail_on(missing, "added objects lack required attributes");
    }

    const Model& m_;
    const MigrationSpec& spec_;
    const Metamodel& src_;
    const Metamodel& dst_;
    expr::ModelView view_;
    Model out_;
    MigrationReport report_;
    std::map<const MapRule*, std::size_t> ruleIndex_, counters_;
    std::set<std::string> overlapWarned_, unmappedWarned_;
};

}  // namespace

MigrationResult migrate_model(const Model& m, const MigrationSpec& spec, const Metamodel& src, const Metamodel& dst) {
    if (m.metamodelName != src.name)
        throw Error(ErrorCode::MetamodelMismatch,
                    "model instantiates '" + m.metamodelName + "', delta migrates from '" + src.name + "'");
    typecheck_mcl(spec, src, dst);
    auto conformance = check_conformance(m, src);
    if (!conformance.conformant()) {
        std::set<std::string> ids;
        for (const auto& v : conformance.violations) ids.insert(v.elementId);
        throw MigrationError("source model does not conform to " + src.name + " " + src.version,
                             {ids.begin(), ids.end()}, std::move(conformance));
    }
    return Migrator(m, spec, src, dst).run();
}

std::string render_migration_text(const MigrationReport& r) {
    std::ostringstream out;
    out << "mapped: " << r.mapped_total() << "\n";
    for (const auto& c : r.mapped) out << "  rule " << c.ruleIndex + 1 << " [" << c.rule << "]: " << c.count << "\n";
    out << "identity: " << r.identityCarried.size() << "\n";
    out << "dropped: " << r.dropped.size() << "\n";
    for (const auto& d : r.dropped) out << "  " << d.id << ": " << d.reason << "\n";
    out << "dropped links: " << r.droppedLinks.size() << "\n";
    for (const auto& d : r.droppedLinks) out << "  " << d.id << ": " << d.reason << "\n";
    out << "added: " << r.addedObjects.size() << "\n";
    for (const auto& id : r.addedObjects) out << "  " << id << "\n";
    for (const auto& w : r.warnings) out << "warning " << to_string(w.code) << " " << w.subject << ": " << w.message << "\n";
    return out.str();
}

Json migration_to_json(const MigrationReport& r) {
    Json mapped = Json::array();
    for (const auto& c : r.mapped) mapped.push_back({{"rule", c.ruleIndex + 1}, {"text", c.rule}, {"count", c.count}});
    auto dropped = [](const std::vector<Dropped>& list) {
        Json a = Json::array();
        for (const auto& d : list) a.push_back({{"id", d.id}, {"reason", d.reason}});
        return a;
    };
    Json warnings = Json::array();
    for (const auto& w : r.warnings)
        warnings.push_back({{"code", std::string(to_string(w.code))}, {"subject", w.subject}, {"message", w.message}});
    return {{"mapped", std::move(mapped)},
            {"identity", r.identityCarried},
            {"dropped", dropped(r.dropped)},
            {"droppedLinks", dropped(r.droppedLinks)},
            {"added", r.addedObjects},
            {"warnings", std::move(warnings)}};
}

}  // namespace evolvekit::mcl
