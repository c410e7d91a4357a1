#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dde {

// Parsed command-line request, one of the four subcommands.
struct CliOptions {
  std::string command;  // solve | certify | depend-datum | depend-rhs
  std::string file;     // problem-definition file (unused by certify)
  double delta = 0.0;   // > 0 overrides the file's grid spacing
  std::uint64_t seed = 0;
  std::string out;      // overrides the primary output path
};

// Executes the request. Returns the process exit status: 0 on success, 1 on
// usage/parse/validation errors, 2 when a solve fails to converge or blows
// up where a global solution was requested. Diagnostics go to `err`,
// report summaries to `out`. All files are written to a temporary name and
// renamed on success, so failures leave no partial outputs.
int run(const CliOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace dde
