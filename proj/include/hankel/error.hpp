#pragma once

#include <stdexcept>
#include <string>

namespace hankel {

// Bad arguments, malformed input, I/O problems. Maps to CLI exit code 1.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class dimension_mismatch : public input_error {
 public:
  using input_error::input_error;
};

// Parameter outside the domain of a special function (poles, nu too small).
class parameter_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A result that contradicts a mathematical invariant beyond rounding noise.
// Maps to CLI exit code 3.
class consistency_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hankel
