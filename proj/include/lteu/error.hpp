#pragma once

#include <stdexcept>
#include <string>

namespace lteu {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver or quadrature gave up before reaching its tolerance.
struct ConvergenceError : ModelError {
  double residual;
  ConvergenceError(const std::string& what, double r) : ModelError(what), residual(r) {}
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace lteu
