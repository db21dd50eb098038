#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace chitf {

struct SolverConfig {
  std::size_t max_sweeps = 5000;
  double tol = 1e-6;         // relative objective change per sweep
  double step0 = 1e-2;       // initial step size of every line search
  bool relative_step = true; // step0 scaled by ||U|| / ||grad||
  double backtrack = 0.5;    // step shrink factor
  std::size_t max_halvings = 30;
  double armijo_c = 1e-4;
  std::size_t log_every = 1;
  std::size_t threads = 1;
  bool deterministic = true;  // forces threads = 1

  void validate() const;
  std::size_t effective_threads() const { return deterministic ? 1 : (threads == 0 ? 1 : threads); }
};

struct TraceRecord {
  std::size_t sweep = 0;
  double objective = 0.0;
  std::vector<bool> step_accepted;  // one flag per block, in update order
};

struct TrainReport {
  std::vector<std::string> blocks;  // update order: "shared", then modalities
  std::vector<TraceRecord> loss_trace;
  bool converged = false;
  std::size_t sweeps_run = 0;
  double wall_time = 0.0;

  double final_objective() const { return loss_trace.empty() ? 0.0 : loss_trace.back().objective; }
};

}  // namespace chitf
