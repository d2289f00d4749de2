#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace evolvekit {

/// Attribute value stored on a model object.
using Literal = std::variant<bool, std::int64_t, double, std::string>;

std::string literal_to_string(const Literal& value);

enum class PrimitiveKind { String, Int, Float, Bool, Enum };

struct AttrType {
    PrimitiveKind kind = PrimitiveKind::String;
    std::vector<std::string> enumValues;  // only for Enum

    bool accepts(const Literal& value) const;
    std::string name() const;
    friend bool operator==(const AttrType&, const AttrType&) = default;
};

/// Upper bound absent means unbounded ("many").
struct Multiplicity {
    std::uint32_t min = 0;
    std::optional<std::uint32_t> max;

    bool admits(std::size_t count) const {
        return count >= min && (!max || count <= *max);
    }
    std::string to_string() const;
    friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

struct MAttribute {
    std::string name;
    AttrType type;
    bool required = false;
    std::optional<Literal> defaultValue;
    friend bool operator==(const MAttribute&, const MAttribute&) = default;
};

struct MContainment {
    std::string role;
    std::string childClass;
    Multiplicity mult;
    friend bool operator==(const MContainment&, const MContainment&) = default;
};

struct MClass {
    std::string name;
    bool isAbstract = false;
    std::optional<std::string> superclass;
    std::vector<MAttribute> attributes;
    std::vector<MContainment> containments;
    friend bool operator==(const MClass&, const MClass&) = default;
};

struct MAssociation {
    std::string name;
    std::string srcClass;
    std::string dstClass;
    std::string srcRole = "src";
    std::string dstRole = "dst";
    Multiplicity srcMult;
    Multiplicity dstMult;
    friend bool operator==(const MAssociation&, const MAssociation&) = default;
};

class Metamodel {
public:
    std::string name;
    std::string version;
    std::vector<MClass> classes;
    std::vector<MAssociation> associations;

    const MClass* find_class(std::string_view className) const;
    const MAssociation* find_association(std::string_view assocName) const;

    /// True when `sub` equals `super` or inherits from it.
    bool is_subtype(std::string_view sub, std::string_view super) const;

    /// Declared plus inherited, most-derived first.
    std::vector<const MAttribute*> all_attributes(std::string_view className) const;
    std::vector<const MContainment*> all_containments(std::string_view className) const;
    const MAttribute* find_attribute(std::string_view className, std::string_view attr) const;
    const MContainment* find_containment(std::string_view className, std::string_view role) const;

    /// Sorts classes, associations and per-class members by name. Called by
    /// validate(); anything that builds a Metamodel by hand should call one of them.
    void normalize();

    /// Checks every invariant and normalizes. Throws METAMODEL_ILLFORMED naming the
    /// offending element.
    void validate();

    friend bool operator==(const Metamodel&, const Metamodel&) = default;
};

}  // namespace evolvekit
