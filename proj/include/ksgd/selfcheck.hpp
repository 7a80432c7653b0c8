#pragma once

#include <string>
#include <vector>

namespace ksgd {

struct CheckResult {
  std::string name;
  bool passed;
  double worst;      ///< largest observed discrepancy
  double tolerance;
};

/// Cross-checks every closed form against its independent oracle at reduced
/// sizes (a few seconds in total).
std::vector<CheckResult> run_selfcheck();

}  // namespace ksgd
