#pragma once

#include <string>
#include <vector>

namespace wfl {

struct SelfTestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Quick deterministic checks of exact identities across all modules.
std::vector<SelfTestResult> run_selftest();

} // namespace wfl
