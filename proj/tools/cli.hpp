#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dyson::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

/// Runs `dyson-lab <command> --config <path> [--out <dir>] [--jobs N] [--seed S]`.
/// args[0] is the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dyson::cli
