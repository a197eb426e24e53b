#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sepcov/linalg.hpp"

namespace sepcov::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kAssumptions = 2, kSolver = 3 };

/// Runs the command line `args` (args[0] is the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a+bi", "a-bi", "a", "bi" with optional whitespace. Throws DomainError.
Complex parse_complex(std::string_view text);

/// Comma-separated complex numbers.
std::vector<Complex> parse_complex_list(std::string_view text);

}  // namespace sepcov::cli
