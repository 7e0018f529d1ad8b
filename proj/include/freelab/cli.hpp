#pragma once

// Command-line front end: `freelab <command> <mode> [options]`.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace freelab::cli {

enum ExitCode : int { ok = 0, comparison_failed = 1, usage_error = 2 };

/// Runs one command line (without the program name). Reports go to `out`
/// unless `--out` names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// JSON text with every float written to 17 significant digits and
/// non-finite values as null.
std::string to_json_text(const nlohmann::ordered_json& value);

/// Rebuilds the argument list recorded in a report's "config" object.
std::vector<std::string> args_from_config(const nlohmann::ordered_json& config);

}  // namespace freelab::cli
