#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace doakit {

/// Root of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation undefined on its arguments (division by an interval holding
/// zero, sqrt of a negative, derivative of abs at 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateBoxError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input: dimensions, tolerances, malformed config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class InvalidProjection : public Error {
 public:
  using Error::Error;
};

class OriginCoveredError : public Error {
 public:
  using Error::Error;
};

class StabilizabilityError : public Error {
 public:
  using Error::Error;
};

class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

/// A closed-loop state left the certified region.
class InvarianceViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace doakit
