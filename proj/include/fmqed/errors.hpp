#ifndef FMQED_ERRORS_HPP
#define FMQED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fmqed {

// Bad or inconsistent input configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A quadrature, lattice sum or iteration ran out of its point budget
// before reaching the requested tolerance.
struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A checked mathematical identity failed beyond its tolerance.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fmqed

#endif
