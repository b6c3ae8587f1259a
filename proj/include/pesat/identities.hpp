#pragma once

#include <string>
#include <vector>

namespace pesat {

struct IdentityResult {
  std::string name;
  std::string instance;
  bool passed = false;
};

/// Evaluates the closed-form bracket and projection identities exactly.
std::vector<IdentityResult> verify_identities();

}  // namespace pesat
