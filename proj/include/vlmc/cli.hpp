#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vlmc {

/// Dispatches one CLI invocation. Returns 0 on success, 1 on invalid
/// arguments, 2 on data or model errors (one-line diagnostics on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vlmc
