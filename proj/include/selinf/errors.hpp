#pragma once

#include <stdexcept>
#include <string>

namespace selinf {

// Numeric failures: solver non-convergence, singular matrices, degenerate
// weights. CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rare-event guard: the requested configuration puts the parameter too far
// from the selection region for the chosen randomization. CLI exit code 4.
class rare_event_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace selinf
