#pragma once

#include <string>
#include <vector>

namespace quasi::cli {

/// Entry point of the `quasi` tool: simulate | denoise | metrics.
/// Returns 0 on success, 2 on configuration/usage/file errors, 3 on numeric
/// failure inside a solve.
int run(const std::vector<std::string>& args);

}  // namespace quasi::cli
