#pragma once

#include <stdexcept>
#include <string>

namespace lfmo {

// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Exhaustive or exact computation refused because the input is too large.
class capacity_error : public std::length_error {
  public:
    using std::length_error::length_error;
};

// A degenerate model (identically zero subordinator, psi == 0, ...).
class degenerate_model_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Structure function violates monotonicity or another validation rule.
class validation_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lfmo
