#pragma once

#include <stdexcept>
#include <string>

namespace ebpttn {

/// Invalid input or configuration (CLI exit status 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-convergence, degeneracy or contraction blow-up (CLI exit status 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace ebpttn
