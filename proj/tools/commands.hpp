#pragma once

#include <iosfwd>
#include <string>

#include "frontctrl/config.hpp"

namespace frontctrl::cli {

enum Exit { kOk = 0, kFailure = 1, kTolerance = 2, kPrecondition = 3 };

int run_cstar(const RunConfig& cfg, std::ostream& out);
int run_profile(const RunConfig& cfg, std::ostream& out);
int run_ecurve(const RunConfig& cfg, std::ostream& out);
int run_verify(const RunConfig& cfg, std::ostream& out);
int run_simulate(const RunConfig& cfg, std::ostream& out);
int run_interface_limit(const RunConfig& cfg, std::ostream& out);

/// Runs a command by name, mapping library errors to exit codes.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace frontctrl::cli
