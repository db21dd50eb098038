#include "chitf/solver.hpp"

#include "chitf/errors.hpp"

#include <chrono>
#include <cmath>

namespace chitf {

TrainReport train(FittedModel& model, const SolverConfig& cfg, const TraceCallback& on_record) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  model.set_threads(cfg.effective_threads());

  std::vector<BlockId> blocks{BlockId::shared()};
  TrainReport report;
  report.blocks.push_back("shared");
  for (std::size_t n = 0; n < model.modalities().size(); ++n) {
    blocks.push_back(BlockId::of_modality(n));
    report.blocks.push_back(model.modalities()[n]);
  }

  ObjectiveParts parts = model.objective_parts();
  double f = parts.total();
  if (!std::isfinite(f)) throw NumericError("objective is not finite at initialization");

  auto emit = [&](TraceRecord record) {
    if (on_record) on_record(record);
    report.loss_trace.push_back(std::move(record));
  };
  emit({0, f, {}});

  for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    const double f_prev = f;
    std::vector<bool> accepted;
    accepted.reserve(blocks.size());
    for (const BlockId block : blocks) {
      const Matrix grad = model.gradient_block(block);
      ObjectiveParts trial;
      auto objective = [&](const Matrix& candidate) {
        trial = model.objective_parts_with(block, candidate, parts);
        return trial.total();
      };
      StepResult step = projected_step(model.block_values(block), f, grad, objective, cfg);
      accepted.push_back(step.accepted);
      if (step.accepted && step.eta > 0.0) {
        model.set_block(block, step.values);
        parts = std::move(trial);
        f = step.objective;
      }
    }
    if (!std::isfinite(f)) throw NumericError("objective became non-finite at sweep " + std::to_string(sweep));
    report.sweeps_run = sweep;
    const double change = std::abs(f_prev - f) / std::max(1.0, std::abs(f_prev));
    report.converged = change < cfg.tol;
    if (sweep % cfg.log_every == 0 || report.converged || sweep == cfg.max_sweeps) {
      emit({sweep, f, std::move(accepted)});
    }
    if (report.converged) break;
  }

  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  model.report() = report;
  return report;
}

}  // namespace chitf
