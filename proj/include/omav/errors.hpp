#pragma once

#include <stdexcept>
#include <string>

namespace omav {

/// Invalid parameters or configuration (CLI exit code 1)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Controller left the region where D2 is invertible (CLI exit code 2)
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver failed (CLI exit code 3)
struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct InvalidThrust : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Broken model assumptions, e.g. a mass matrix that is not SPD
struct ModelError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace omav
