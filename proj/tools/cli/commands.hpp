#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jamopt::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kSolverFailure = 1;
inline constexpr int kConfigError = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name:
///
///   optimize <scenario> [--pw-db X] [--out FILE]
///   rates <scenario> --alloc {uniform|optimal|file:PATH} [--pw-db X]
///   sweep <scenario> [--output STEM] [--workers N]
///   oracle-check <scenario> [--pw-db X] [--grid 1e-3]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jamopt::cli
