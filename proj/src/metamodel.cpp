#include "evolvekit/metamodel.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "evolvekit/error.hpp"

namespace evolvekit {

std::string literal_to_string(const Literal& value) {
    struct Printer {
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const {
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
            std::string out(buf, end);
            if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
            return out;
        }
        std::string operator()(const std::string& s) const { return "\"" + s + "\""; }
    };
    return std::visit(Printer{}, value);
}

bool AttrType::accepts(const Literal& value) const {
    switch (kind) {
    case PrimitiveKind::String: return std::holds_alternative<std::string>(value);
    case PrimitiveKind::Int: return std::holds_alternative<std::int64_t>(value);
    case PrimitiveKind::Float:
        return std::holds_alternative<double>(value) ||
               std::holds_alternative<std::int64_t>(value);
    case PrimitiveKind::Bool: return std::holds_alternative<bool>(value);
    case PrimitiveKind::Enum: {
        const auto* s = std::get_if<std::string>(&value);
        return s && std::find(enumValues.begin(), enumValues.end(), *s) != enumValues.end();
    }
    }
    return false;
}

std::string AttrType::name() const {
    switch (kind) {
    case PrimitiveKind::String: return "string";
    case PrimitiveKind::Int: return "int";
    case PrimitiveKind::Float: return "float";
    case PrimitiveKind::Bool: return "bool";
    case PrimitiveKind::Enum: {
        std::string out = "enum(";
        for (std::size_t i = 0; i < enumValues.size(); ++i) {
            if (i) out += ",";
            out += enumValues[i];
        }
        return out + ")";
    }
    }
    return "?";
}

std::string Multiplicity::to_string() const {
    return std::to_string(min) + ".." + (max ? std::to_string(*max) : std::string("*"));
}

const MClass* Metamodel::find_class(std::string_view className) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), className,
                               [](const MClass& c, std::string_view n) { return c.name < n; });
    if (it != classes.end() && it->name == className) return &*it;
    // Not normalized yet (hand-built); fall back to a scan.
    for (const auto& c : classes)
        if (c.name == className) return &c;
    return nullptr;
}

const MAssociation* Metamodel::find_association(std::string_view assocName) const {
    for (const auto& a : associations)
        if (a.name == assocName) return &a;
    return nullptr;
}

bool Metamodel::is_subtype(std::string_view sub, std::string_view super) const {
    const MClass* cls = find_class(sub);
    // Bounded by the class count so a cyclic (unvalidated) metamodel cannot hang.
    for (std::size_t guard = 0; cls && guard <= classes.size(); ++guard) {
        if (cls->name == super) return true;
        if (!cls->superclass) return false;
        cls = find_class(*cls->superclass);
    }
    return false;
}

std::vector<const MAttribute*> Metamodel::all_attributes(std::string_view className) const {
    std::vector<const MAttribute*> out;
    const MClass* cls = find_class(className);
    for (std::size_t guard = 0; cls && guard <= classes.size(); ++guard) {
        for (const auto& a : cls->attributes) out.push_back(&a);
        cls = cls->superclass ? find_class(*cls->superclass) : nullptr;
    }
    return out;
}

std::vector<const MContainment*> Metamodel::all_containments(std::string_view className) const {
    std::vector<const MContainment*> out;
    const MClass* cls = find_class(className);
    for (std::size_t guard = 0; cls && guard <= classes.size(); ++guard) {
        for (const auto& c : cls->containments) out.push_back(&c);
        cls = cls->superclass ? find_class(*cls->superclass) : nullptr;
    }
    return out;
}

const MAttribute* Metamodel::find_attribute(std::string_view className,
                                            std::string_view attr) const {
    for (const auto* a : all_attributes(className))
        if (a->name == attr) return a;
    return nullptr;
}

const MContainment* Metamodel::find_containment(std::string_view className,
                                                std::string_view role) const {
    for (const auto* c : all_containments(className))
        if (c->role == role) return c;
    return nullptr;
}

void Metamodel::normalize() {
    auto byName = [](const auto& a, const auto& b) { return a.name < b.name; };
    std::sort(classes.begin(), classes.end(), byName);
    std::sort(associations.begin(), associations.end(), byName);
    for (auto& c : classes) {
        std::sort(c.attributes.begin(), c.attributes.end(), byName);
        std::sort(c.containments.begin(), c.containments.end(),
                  [](const MContainment& a, const MContainment& b) { return a.role < b.role; });
    }
}

namespace {

[[noreturn]] void illformed(const std::string& what) {
    throw Error(ErrorCode::MetamodelIllformed, what);
}

void check_multiplicity(const Multiplicity& m, const std::string& where) {
    if (m.max && m.min > *m.max)
        illformed(where + ": multiplicity min " + std::to_string(m.min) + " exceeds max " +
                  std::to_string(*m.max));
}

}  // namespace

void Metamodel::validate() {
    normalize();
    for (std::size_t i = 1; i < classes.size(); ++i)
        if (classes[i].name == classes[i - 1].name)
            illformed("duplicate class '" + classes[i].name + "'");

    for (const auto& c : classes) {
        if (c.superclass && !find_class(*c.superclass))
            illformed("class '" + c.name + "': unknown superclass '" + *c.superclass + "'");
    }
    // Single inheritance makes each chain a path; a cycle shows up as a revisit.
    for (const auto& c : classes) {
        std::set<std::string> seen{c.name};
        const MClass* cur = &c;
        while (cur->superclass) {
            if (!seen.insert(*cur->superclass).second)
                illformed("inheritance cycle through class '" + c.name + "'");
            cur = find_class(*cur->superclass);
        }
    }
    for (const auto& c : classes) {
        std::set<std::string> attrNames;
        for (const auto* a : all_attributes(c.name)) {
            if (!attrNames.insert(a->name).second)
                illformed("class '" + c.name + "': attribute '" + a->name +
                          "' declared more than once along the inheritance chain");
        }
        for (const auto& a : c.attributes) {
            if (a.type.kind == PrimitiveKind::Enum && a.type.enumValues.empty())
                illformed("attribute '" + c.name + "." + a.name + "': enum without values");
            if (a.defaultValue && !a.type.accepts(*a.defaultValue))
                illformed("attribute '" + c.name + "." + a.name + "': default " +
                          literal_to_string(*a.defaultValue) + " is not a " + a.type.name());
        }
        std::set<std::string> roles;
        for (const auto* k : all_containments(c.name)) {
            if (!roles.insert(k->role).second)
                illformed("class '" + c.name + "': containment role '" + k->role +
                          "' declared more than once");
        }
        for (const auto& k : c.containments) {
            if (!find_class(k.childClass))
                illformed("containment '" + c.name + "." + k.role + "': unknown class '" +
                          k.childClass + "'");
            check_multiplicity(k.mult, "containment '" + c.name + "." + k.role + "'");
        }
    }
    for (std::size_t i = 0; i < associations.size(); ++i) {
        const auto& a = associations[i];
        if (i > 0 && associations[i - 1].name == a.name)
            illformed("duplicate association '" + a.name + "'");
        if (!find_class(a.srcClass))
            illformed("association '" + a.name + "': unknown class '" + a.srcClass + "'");
        if (!find_class(a.dstClass))
            illformed("association '" + a.name + "': unknown class '" + a.dstClass + "'");
        if (a.srcRole == a.dstRole)
            illformed("association '" + a.name + "': role names must differ");
        check_multiplicity(a.srcMult, "association '" + a.name + "'");
        check_multiplicity(a.dstMult, "association '" + a.name + "'");
    }
}

}  // namespace evolvekit
