#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evolvekit::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kMigration = 3,
    kConflicts = 4,
};

/// Runs one invocation; `args` excludes the program name. Reports go to `out`,
/// diagnostics and usage to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evolvekit::cli
