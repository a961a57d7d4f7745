#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fairsoc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An economic primitive was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A descriptive statistic is undefined for the given sample.
class StatisticError : public Error {
 public:
  using Error::Error;
};

/// The optimizer could not evaluate its starting point.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked on an object in the wrong state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Configuration file or flag problem; `key()` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("configuration error at '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A simulation invariant (conservation, no-resurrection, ...) was broken.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace fairsoc
