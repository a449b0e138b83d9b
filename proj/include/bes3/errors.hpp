#pragma once

#include <stdexcept>
#include <string>

namespace bes3 {

/// Argument outside the mathematical domain of a closed-form law.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid simulation or check configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller supplied unusable input (empty samples, too few points, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature ran out of subdivisions before meeting tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double value, double error_estimate)
      : std::runtime_error(what), value_(value), error_estimate_(error_estimate) {}

  double value() const noexcept { return value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

}  // namespace bes3
