#pragma once

#include <stdexcept>
#include <string>

namespace hvdcsim {

/// Invalid physical or controller parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed-form relation evaluated outside its domain (negative discriminant,
/// singular at R_dc = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operating-point initialization failed.
class InitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration aborted; carries the offending channel and time.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::string channel, double time, const std::string& what)
      : std::runtime_error(what), channel_(std::move(channel)), time_(time) {}

  const std::string& channel() const noexcept { return channel_; }
  double time() const noexcept { return time_; }

 private:
  std::string channel_;
  double time_;
};

/// Bad configuration file or command-line value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hvdcsim
