#pragma once

#include <stdexcept>
#include <string>

namespace graphex {

// Error taxonomy mirrors the CLI exit codes:
//   ValidationError -> 2, NumericError -> 3, CapacityError -> 4.

class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what, double achieved_error = 0.0)
      : std::runtime_error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

private:
  double achieved_error_;
};

class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphex
