#pragma once

#include <string>
#include <vector>

#include "evolvekit/io.hpp"
#include "evolvekit/metamodel.hpp"
#include "evolvekit/model.hpp"

namespace evolvekit {

enum class ViolationCode {
    UnknownClass,
    AbstractInstantiation,
    MissingRequiredAttr,
    AttrTypeMismatch,
    UnknownAttr,
    BadContainmentRole,
    ContainmentMult,
    UnknownAssoc,
    LinkEndType,
    LinkMult,
};

std::string_view to_string(ViolationCode code) noexcept;

struct Violation {
    ViolationCode code;
    std::string elementId;  // object or link id
    std::string message;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ConformanceReport {
    std::vector<Violation> violations;  // sorted by element id, then code, then message
    bool conformant() const { return violations.empty(); }
};

/// Typing and multiplicity check of a structurally valid model. Never throws.
/// Objects of unknown class are reported once and otherwise skipped.
ConformanceReport check_conformance(const Model& model, const Metamodel& mm);

std::string render_conformance_text(const ConformanceReport& report);
Json conformance_to_json(const ConformanceReport& report);

}  // namespace evolvekit
