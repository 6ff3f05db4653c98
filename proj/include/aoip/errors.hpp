#pragma once

#include <stdexcept>
#include <string>

namespace aoip {

// Invalid user-supplied configuration (bad weights, malformed schema,
// unknown policy name). Maps to CLI exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A runtime invariant failed mid-run (wasteful transmission under a
// drop-free policy, a countdown deadline missed). Maps to CLI exit code 3.
struct invariant_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative routine exhausted its iteration allowance without reaching
// the requested tolerance.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An exact-optimization request exceeds its state or enumeration budget.
// Maps to CLI exit code 4.
struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aoip
