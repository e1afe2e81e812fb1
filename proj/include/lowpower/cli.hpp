#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lowpower::cli {

enum ExitCode : int { kSuccess = 0, kDiagnostics = 1, kUsage = 2 };

/// Runs one command line (without the program name). Reports go to `out`
/// unless `--out` names a file; diagnostics and usage errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "start:stop:step" with step > 0 and start <= stop. Throws std::invalid_argument.
std::vector<double> parse_range(const std::string& text);

/// Shortest decimal with at most 6 significant digits.
std::string format_number(double value);

} // namespace lowpower::cli
