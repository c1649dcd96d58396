#pragma once

#include <stdexcept>
#include <string>

namespace quadrl {

// Bad configuration: unknown preset, invalid field values, malformed files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Simulation or training produced non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quadrl
