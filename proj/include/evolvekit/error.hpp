#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evolvekit {

enum class ErrorCode {
    ParseError,
    TypeError,
    MetamodelIllformed,
    ModelIllformed,
    MetamodelMismatch,
    MigrationIncomplete,
    RuleGraphIllformed,
    NotSiblings,
    IdUnknown,
    AtRoot,
    IllformedStatechart,
    Nondeterministic,
};

std::string_view to_string(ErrorCode code) noexcept;

struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

/// Every failure raised by the library carries one of the codes above.
/// Parse and type errors also carry the location in the source document.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<SourceLocation> where = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    const std::optional<SourceLocation>& where() const noexcept { return where_; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::optional<SourceLocation> where_;
    std::string detail_;
};

}  // namespace evolvekit
