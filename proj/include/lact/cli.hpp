#pragma once

#include "lact/geometry.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lact::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// "A:B" in degrees.
AngularWindow parse_range(const std::string& text);
/// "1..7", "2,4,6" or a mix such as "1..3,7".
std::vector<int> parse_levels(const std::string& text);

/// Runs the toolchain with argv-style arguments (args[0] is the program name)
/// and returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lact::cli
