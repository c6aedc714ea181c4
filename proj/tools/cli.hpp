#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dnaembed::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "DNAEMBED_OUT";
inline constexpr const char* kToolVersion = "0.1.0";

/// args excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dnaembed::cli
