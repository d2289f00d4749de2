#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvekit/metamodel.hpp"

namespace evolvekit {

struct MObject {
    std::string id;
    std::string className;
    std::map<std::string, Literal> attributes;
    /// role -> child ids, kept sorted by id
    std::map<std::string, std::vector<std::string>> children;
    friend bool operator==(const MObject&, const MObject&) = default;
};

struct MLink {
    std::string id;
    std::string association;
    std::string src;
    std::string dst;
    friend bool operator==(const MLink&, const MLink&) = default;
};

/// Objects and links are keyed by id so iteration order is always the
/// canonical one.
struct Model {
    std::string metamodelName;
    std::string metamodelVersion;
    std::map<std::string, MObject> objects;
    std::map<std::string, MLink> links;
    std::vector<std::string> roots;

    const MObject* find(std::string_view id) const;
    MObject* find(std::string_view id);

    /// Sorts roots and child lists; drops empty child roles.
    void normalize();

    /// Referential integrity: unique ids, known link endpoints, containment forms a
    /// forest rooted at `roots`. Throws MODEL_ILLFORMED. Also normalizes.
    void validate();

    friend bool operator==(const Model&, const Model&) = default;
};

struct ParentRef {
    std::string parent;
    std::string role;
};

/// child id -> containing object. Roots are absent.
std::map<std::string, ParentRef> parent_index(const Model& model);

/// Containment pre-order starting at the roots; siblings (across roles) visited by id.
std::vector<std::string> preorder(const Model& model);

/// Ids of the object and all of its containment descendants.
std::vector<std::string> subtree(const Model& model, std::string_view id);

}  // namespace evolvekit
