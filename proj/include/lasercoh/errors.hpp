#pragma once

#include <stdexcept>
#include <string>

namespace lasercoh {

// Thrown when a linear solve, eigensolve or integration fails to reach its
// target accuracy. Carries the last residual so callers can report it.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const { return residual_; }

  private:
    double residual_;
};

}  // namespace lasercoh
