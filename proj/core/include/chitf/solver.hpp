#pragma once

// Block coordinate descent: each sweep takes one projected gradient step on
// the shared factor, then on every modality factor in model order.

#include "chitf/model.hpp"
#include "chitf/projected_step.hpp"
#include "chitf/solver_config.hpp"

#include <functional>

namespace chitf {

using TraceCallback = std::function<void(const TraceRecord&)>;

/// Trains in place and stores the report in model.report().
///
/// Stops when |f_t - f_{t-1}| / max(1, |f_{t-1}|) < cfg.tol after a sweep, or
/// after cfg.max_sweeps sweeps. Throws NumericError when the starting
/// objective is not finite. A block whose line search is exhausted keeps its
/// values for that sweep and is flagged in the trace.
TrainReport train(FittedModel& model, const SolverConfig& cfg, const TraceCallback& on_record = {});

}  // namespace chitf
