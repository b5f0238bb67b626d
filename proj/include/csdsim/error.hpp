#pragma once

#include <stdexcept>
#include <string>

namespace csdsim {

/// Bad configuration value or file. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input dataset. Maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model state that the lifecycle rules forbid: an illegal transition, an
/// event in the past, an over-full open list. Maps to exit code 3.
class ModelInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace csdsim
