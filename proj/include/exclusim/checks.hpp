#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace exclusim {

struct CheckResult {
  std::string name;
  bool passed = false;
  //! The quantity compared against its threshold (NaN when not applicable).
  double value = 0;
  std::string detail;
};

/// Headless property suite over every module. `quick` trims the sizes of the
/// statistical and exhaustive checks.
std::vector<CheckResult> run_checks(bool quick, std::uint64_t seed = 1);

}  // namespace exclusim
