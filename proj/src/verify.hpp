#pragma once

// Named invariant checks across all modules, run by the `verify` command.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ptembed::verify {

struct VerifyOptions {
  std::uint64_t seed = 12345;
  // Replaces every check tolerance when finite.
  double tolerance_override = std::numeric_limits<double>::quiet_NaN();
  double orthogonality_theta = 10.0;
  int max_n = 4;
  int dense_cap = 8;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  int failures() const;
};

// Throws CapExceeded when max_n > dense_cap, InvalidArgument on bad options.
VerifyReport run_verify(const VerifyOptions& options);

}  // namespace ptembed::verify
