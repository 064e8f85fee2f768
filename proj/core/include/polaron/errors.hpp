#pragma once

#include <stdexcept>
#include <string>

namespace polaron {

/// Invalid user-supplied parameters (bad physical constants, malformed specs).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested object would exceed a configured size budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke an operation's precondition (inconsistent inputs, empty sets).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Adaptive quadrature ran out of subdivision budget.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polaron
