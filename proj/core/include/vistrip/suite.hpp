#pragma once

#include <string>
#include <vector>

namespace vistrip::verify {

struct SuiteCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The property suite behind `vistrip verify`: oracle equivalence, gradient
/// checks with negative controls, footprint accounting, loss identities and
/// locality. `small` uses fewer and smaller cases.
std::vector<SuiteCheck> run_property_suite(bool small);

/// Pass/fail table, one line per check.
std::string format_suite(const std::vector<SuiteCheck>& checks);

}  // namespace vistrip::verify
