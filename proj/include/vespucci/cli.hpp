#pragma once

#include "vespucci/rule_engine.hpp"

#include <ostream>

namespace vespucci {

/// Exit codes: 0 clean, 1 violations found, 2 operational error.
enum ExitCode : int { kExitClean = 0, kExitViolations = 1, kExitError = 2 };

/// Entry point of the `vespucci` command. Subcommands: lint, aggregate, rules, kb.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
/// Same, with a caller-supplied rule registry (for custom rules).
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err, const RuleRegistry &registry);

} // namespace vespucci
