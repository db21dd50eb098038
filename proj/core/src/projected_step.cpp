#include "chitf/projected_step.hpp"

#include "chitf/errors.hpp"

#include <cmath>

namespace chitf {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("solver tol must be > 0");
  if (!(step0 > 0.0)) throw ConfigError("solver step0 must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver backtrack must be in (0, 1)");
  if (!(armijo_c >= 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must be in [0, 1)");
  if (log_every == 0) throw ConfigError("log_every must be >= 1");
}

StepResult projected_step(const Matrix& current, double current_objective, const Matrix& grad,
                          const std::function<double(const Matrix&)>& objective,
                          const SolverConfig& cfg) {
  StepResult result;
  result.values = current;
  result.objective = current_objective;

  if (grad.isZero(0.0)) {
    result.accepted = true;
    return result;
  }

  double eta = cfg.step0;
  if (cfg.relative_step) {
    // step0 is a fraction of the block norm; a zero block falls back to the absolute step.
    const double unorm = current.norm();
    if (unorm > 0.0) eta = cfg.step0 * unorm / grad.norm();
  }
  for (std::size_t h = 0; h <= cfg.max_halvings; ++h, eta *= cfg.backtrack) {
    Matrix candidate = (current - eta * grad).cwiseMax(0.0);
    if (candidate == current) {
      // Projected-stationary: every moving coordinate is pinned at zero.
      result.accepted = true;
      return result;
    }
    const double decrease = grad.cwiseProduct(current - candidate).sum();
    const double f = objective(candidate);
    if (std::isfinite(f) && f <= current_objective - cfg.armijo_c * decrease) {
      result.values = std::move(candidate);
      result.objective = f;
      result.eta = eta;
      result.accepted = true;
      result.halvings = h;
      return result;
    }
  }
  return result;
}

}  // namespace chitf
