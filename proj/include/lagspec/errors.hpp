#pragma once

#include <stdexcept>
#include <string>

namespace lagspec {

// Invalid arguments: shapes, ranges, parameters outside their domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numeric backend trouble: non-convergence, singular blocks, bracketing failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration file or override did not validate against the schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing an output artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lagspec
