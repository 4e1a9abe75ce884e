#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tlsnoise {

/// Input outside the physical domain of an operation (non-positive density,
/// inverted bounds, zero total field energy, ...). Maps to CLI exit code 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller misuse: malformed arguments, unknown labels, bad windows.
/// Maps to CLI exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested root (e.g. a crossover temperature) lies outside the search range.
class OutOfRangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Logarithmic Q law evaluated at or beyond saturation.
class SaturatedRegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Discrete control loop configured outside its stability bound.
class InstabilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A value paired with non-fatal validity warnings.
template <class T>
struct Diagnosed {
  T value{};
  std::vector<std::string> warnings;
};

}  // namespace tlsnoise
