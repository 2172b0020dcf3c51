#pragma once

#include <stdexcept>
#include <string>

namespace cityaccess {

// Raised for malformed or inconsistent scenario/CLI input. The message names
// the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a mathematical precondition fails (e.g. a cost derivative of 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cityaccess
