#pragma once

#include "chitf/solver_config.hpp"
#include "chitf/tensor.hpp"

#include <functional>

namespace chitf {

struct StepResult {
  Matrix values;
  double objective = 0.0;
  double eta = 0.0;
  bool accepted = false;
  std::size_t halvings = 0;
};

/// One projected gradient step with Armijo backtracking.
///
/// Tries candidate = max(0, U - eta * grad) for eta = eta0, eta0 * backtrack,
/// ... and accepts the first with
///   f(candidate) <= f(U) - armijo_c * <grad, U - candidate>.
/// eta0 is step0 * ||U|| / ||grad|| with cfg.relative_step (a non-zero U),
/// otherwise step0. When every trial fails the result carries U unchanged and accepted = false.
StepResult projected_step(const Matrix& current, double current_objective, const Matrix& grad,
                          const std::function<double(const Matrix&)>& objective,
                          const SolverConfig& cfg);

}  // namespace chitf
