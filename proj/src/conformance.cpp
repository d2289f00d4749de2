#include "evolvekit/conformance.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace evolvekit {

std::string_view to_string(ViolationCode code) noexcept {
    switch (code) {
    case ViolationCode::UnknownClass: return "UNKNOWN_CLASS";
    case ViolationCode::AbstractInstantiation: return "ABSTRACT_INSTANTIATION";
    case ViolationCode::MissingRequiredAttr: return "MISSING_REQUIRED_ATTR";
    case ViolationCode::AttrTypeMismatch: return "ATTR_TYPE_MISMATCH";
    case ViolationCode::UnknownAttr: return "UNKNOWN_ATTR";
    case ViolationCode::BadContainmentRole: return "BAD_CONTAINMENT_ROLE";
    case ViolationCode::ContainmentMult: return "CONTAINMENT_MULT";
    case ViolationCode::UnknownAssoc: return "UNKNOWN_ASSOC";
    case ViolationCode::LinkEndType: return "LINK_END_TYPE";
    case ViolationCode::LinkMult: return "LINK_MULT";
    }
    return "?";
}

namespace {

class Checker {
public:
    Checker(const Model& model, const Metamodel& mm) : model_(model), mm_(mm) {}

    ConformanceReport run() {
        for (const auto& [id, obj] : model_.objects) check_object(obj);
        check_links();
        std::sort(out_.violations.begin(), out_.violations.end(),
                  [](const Violation& a, const Violation& b) {
                      return std::tie(a.elementId, a.code, a.message) <
                             std::tie(b.elementId, b.code, b.message);
                  });
        return std::move(out_);
    }

private:
    void report(ViolationCode code, const std::string& id, std::string message) {
        out_.violations.push_back(Violation{code, id, std::move(message)});
    }

    void check_object(const MObject& obj) {
        const MClass* cls = mm_.find_class(obj.className);
        if (!cls) {
            report(ViolationCode::UnknownClass, obj.id,
                   "class '" + obj.className + "' is not declared by " + mm_.name);
            return;
        }
        if (cls->isAbstract)
            report(ViolationCode::AbstractInstantiation, obj.id,
                   "class '" + obj.className + "' is abstract");

        for (const auto* attr : mm_.all_attributes(obj.className)) {
            auto it = obj.attributes.find(attr->name);
            if (it == obj.attributes.end()) {
                if (attr->required)
                    report(ViolationCode::MissingRequiredAttr, obj.id,
                           "required attribute '" + attr->name + "' is not set");
            } else if (!attr->type.accepts(it->second)) {
                report(ViolationCode::AttrTypeMismatch, obj.id,
                       "attribute '" + attr->name + "' = " + literal_to_string(it->second) +
                           " is not a " + attr->type.name());
            }
        }
        for (const auto& [name, value] : obj.attributes)
            if (!mm_.find_attribute(obj.className, name))
                report(ViolationCode::UnknownAttr, obj.id,
                       "attribute '" + name + "' is not declared on '" + obj.className + "'");

        for (const auto& [role, kids] : obj.children) {
            const MContainment* k = mm_.find_containment(obj.className, role);
            if (!k) {
                report(ViolationCode::BadContainmentRole, obj.id,
                       "role '" + role + "' is not declared on '" + obj.className + "'");
                continue;
            }
            for (const auto& kid : kids) {
                const MObject* child = model_.find(kid);
                if (child && mm_.find_class(child->className) &&
                    !mm_.is_subtype(child->className, k->childClass))
                    report(ViolationCode::BadContainmentRole, obj.id,
                           "role '" + role + "' holds '" + kid + "' of class '" + child->className +
                               "', expected '" + k->childClass + "'");
            }
        }
        for (const auto* k : mm_.all_containments(obj.className)) {
            auto it = obj.children.find(k->role);
            std::size_t n = it == obj.children.end() ? 0 : it->second.size();
            if (!k->mult.admits(n))
                report(ViolationCode::ContainmentMult, obj.id,
                       "role '" + k->role + "' has " + std::to_string(n) + " children, expected " +
                           k->mult.to_string());
        }
    }

    void check_links() {
        // (association, object) -> number of links in which the object is src / dst
        std::map<std::pair<std::string, std::string>, std::size_t> asSrc, asDst;
        for (const auto& [id, link] : model_.links) {
            const MAssociation* a = mm_.find_association(link.association);
            if (!a) {
                report(ViolationCode::UnknownAssoc, id,
                       "association '" + link.association + "' is not declared by " + mm_.name);
                continue;
            }
            check_end(link, link.src, a->srcClass, a->srcRole);
            check_end(link, link.dst, a->dstClass, a->dstRole);
            ++asSrc[{a->name, link.src}];
            ++asDst[{a->name, link.dst}];
        }
        for (const auto& a : mm_.associations) {
            for (const auto& [id, obj] : model_.objects) {
                if (!mm_.find_class(obj.className)) continue;
                if (mm_.is_subtype(obj.className, a.srcClass)) {
                    auto it = asSrc.find({a.name, id});
                    std::size_t n = it == asSrc.end() ? 0 : it->second;
                    if (!a.dstMult.admits(n))
                        report(ViolationCode::LinkMult, id,
                               "'" + a.name + "' links to " + std::to_string(n) + " '" + a.dstRole +
                                   "' objects, expected " + a.dstMult.to_string());
                }
                if (mm_.is_subtype(obj.className, a.dstClass)) {
                    auto it = asDst.find({a.name, id});
                    std::size_t n = it == asDst.end() ? 0 : it->second;
                    if (!a.srcMult.admits(n))
                        report(ViolationCode::LinkMult, id,
                               "'" + a.name + "' links from " + std::to_string(n) + " '" +
                                   a.srcRole + "' objects, expected " + a.srcMult.to_string());
                }
            }
        }
    }

    void check_end(const MLink& link, const std::string& objId, const std::string& declared,
                   const std::string& role) {
        const MObject* obj = model_.find(objId);
        if (!obj || !mm_.find_class(obj->className)) return;  // reported elsewhere
        if (!mm_.is_subtype(obj->className, declared))
            report(ViolationCode::LinkEndType, link.id,
                   "role '" + role + "' is played by '" + objId + "' of class '" + obj->className +
                       "', expected '" + declared + "'");
    }

    const Model& model_;
    const Metamodel& mm_;
    ConformanceReport out_;
};

}  // namespace

ConformanceReport check_conformance(const Model& model, const Metamodel& mm) {
    return Checker(model, mm).run();
}

std::string render_conformance_text(const ConformanceReport& report) {
    std::ostringstream out;
    for (const auto& v : report.violations)
        out << to_string(v.code) << " " << v.elementId << ": " << v.message << "\n";
    if (report.conformant()) {
        out << "conformant\n";
    } else {
        out << "not conformant: " << report.violations.size() << " violation(s)\n";
    }
    return out.str();
}

Json conformance_to_json(const ConformanceReport& report) {
    Json vs = Json::array();
    for (const auto& v : report.violations)
        vs.push_back({{"code", std::string(to_string(v.code))}, {"id", v.elementId}, {"message", v.message}});
    return {{"conformant", report.conformant()}, {"violations", std::move(vs)}};
}

}  // namespace evolvekit
