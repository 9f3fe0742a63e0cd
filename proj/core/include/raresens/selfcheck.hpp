#pragma once

// Built-in verification suite behind the CLI `verify` subcommand. Every
// check recomputes a library result against an independent oracle (dense
// grids with golden-section refinement, exhaustive event enumeration,
// closed forms, exact dynamic programs) and reports the measured
// discrepancy. Deterministic: fixed seeds, no configuration.

#include <string>
#include <vector>

namespace raresens {

struct CheckResult {
  std::string name;
  bool pass = false;
  double discrepancy = 0.0;  // worst measured deviation, check-specific scale
  std::string detail;
};

std::vector<CheckResult> run_selfchecks();

}  // namespace raresens
