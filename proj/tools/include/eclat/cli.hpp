#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eclat::cli {

enum ExitCode : int { kOk = 0, kComparisonFailed = 1, kConfigError = 2, kRuntimeError = 3 };

/// Entry point of the `eclat` tool. args[0] is the program name. Output
/// files default to $ECLAT_OUT_DIR when --out is not given.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eclat::cli
