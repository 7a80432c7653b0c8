#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksgd {

/// Invalid parameters, unsupported kernel orders, malformed config files.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A recursion produced a non-finite or exploding coefficient.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Linear system is singular to working precision.
class NumericalRankError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ksgd
