#include "evolvekit/error.hpp"

namespace evolvekit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::TypeError: return "TYPE_ERROR";
    case ErrorCode::MetamodelIllformed: return "METAMODEL_ILLFORMED";
    case ErrorCode::ModelIllformed: return "MODEL_ILLFORMED";
    case ErrorCode::MetamodelMismatch: return "METAMODEL_MISMATCH";
    case ErrorCode::MigrationIncomplete: return "MIGRATION_INCOMPLETE";
    case ErrorCode::RuleGraphIllformed: return "RULEGRAPH_ILLFORMED";
    case ErrorCode::NotSiblings: return "NOT_SIBLINGS";
    case ErrorCode::IdUnknown: return "ID_UNKNOWN";
    case ErrorCode::AtRoot: return "AT_ROOT";
    case ErrorCode::IllformedStatechart: return "ILLFORMED_STATECHART";
    case ErrorCode::Nondeterministic: return "NONDETERMINISTIC";
    }
    return "UNKNOWN";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::optional<SourceLocation>& where) {
    std::string out(to_string(code));
    if (where) {
        out += " at " + std::to_string(where->line) + ":" + std::to_string(where->column);
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<SourceLocation> where)
    : std::runtime_error(format_message(code, message, where)),
      code_(code),
      where_(where),
      detail_(message) {}

}  // namespace evolvekit
