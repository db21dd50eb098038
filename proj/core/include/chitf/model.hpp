#pragma once

// The collective objective: M hidden interaction tensors over a shared patient
// mode, one factor matrix per distinct modality (tying by identity), one NLL
// term per (tensor, composing modality) pair, plus regularizers on the
// modality factors.

#include "chitf/model_spec.hpp"
#include "chitf/observations.hpp"
#include "chitf/tensor.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chitf {

/// Either the shared patient factor or one modality factor.
struct BlockId {
  bool is_shared = true;
  std::size_t modality = 0;

  static BlockId shared() { return {true, 0}; }
  static BlockId of_modality(std::size_t index) { return {false, index}; }
  friend bool operator==(const BlockId&, const BlockId&) = default;
};

/// One likelihood term: observation of `target` under tensor `tensor`.
struct Term {
  std::size_t tensor = 0;
  std::size_t target = 0;               // model modality index
  std::vector<std::size_t> members;     // model modality indices of the tensor
  ObservationKind kind;
  std::optional<GaussianParams> gaussian;
};

struct ObjectiveParts {
  std::vector<double> terms;        // per Term, in term order
  std::vector<double> regularizer;  // per modality, in modality order

  double total() const;
};

class FittedModel {
 public:
  /// Allocate factors and attach observations. Factors start i.i.d. uniform
  /// in (0, 1) drawn from spec.seed: shared first, then modalities in order.
  static FittedModel build(const ModelSpec& spec, const ObservationSet& observations);

  /// Restore from stored factors, without observations.
  static FittedModel from_factors(const ModelSpec& spec, FactorMatrix shared,
                                  std::vector<FactorMatrix> modality_factors,
                                  std::vector<std::string> shared_ids,
                                  std::vector<std::vector<std::string>> item_ids);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t rank() const noexcept { return spec_.rank; }
  const std::vector<std::string>& modalities() const noexcept { return modalities_; }
  std::size_t modality_index(const std::string& name) const;
  const std::vector<Term>& terms() const noexcept { return terms_; }

  const FactorMatrix& shared() const noexcept { return shared_; }
  const FactorMatrix& factor(std::size_t modality) const { return factors_.at(modality); }
  const FactorMatrix& factor(const std::string& name) const { return factor(modality_index(name)); }
  std::span<const FactorMatrix> modality_factors() const noexcept { return factors_; }

  const std::vector<std::string>& shared_ids() const noexcept { return shared_ids_; }
  const std::vector<std::string>& item_ids(std::size_t modality) const { return item_ids_.at(modality); }

  const Matrix& block_values(BlockId block) const;
  /// Stores max(0, values) into the block. Shape must match.
  void set_block(BlockId block, const Matrix& values);
  void set_shared(FactorMatrix shared);
  void set_factor(std::size_t modality, FactorMatrix factor);

  bool has_observations() const noexcept { return !observed_.empty(); }
  const Matrix& observed(std::size_t modality) const { return observed_.at(modality); }

  /// Terms whose value depends on the block.
  std::vector<std::size_t> terms_touching(BlockId block) const;
  /// Marginal reconstruction Vhat for one term.
  Matrix reconstruct(std::size_t term) const;

  double term_nll(std::size_t term) const;
  double regularizer_value(std::size_t modality) const;
  ObjectiveParts objective_parts() const;
  double objective() const;

  /// Objective with `block` replaced by `candidate`, reusing `base` for every
  /// part the block does not touch. Summation order matches objective().
  ObjectiveParts objective_parts_with(BlockId block, const Matrix& candidate,
                                      const ObjectiveParts& base) const;

  /// d objective / d block, including regularizer gradients for modality blocks.
  Matrix gradient_block(BlockId block) const;
  /// "shared" or a modality name.
  Matrix gradient_block(const std::string& block) const;
  BlockId block_id(const std::string& block) const;

  void set_threads(std::size_t threads) noexcept { threads_ = threads == 0 ? 1 : threads; }
  std::size_t threads() const noexcept { return threads_; }

  TrainReport& report() noexcept { return report_; }
  const TrainReport& report() const noexcept { return report_; }

 private:
  FittedModel() = default;
  void build_terms();

  struct TermEval {
    double value = 0.0;
    Matrix grad_shared;   // I_s x R
    Matrix grad_target;   // I_target x R
    RowVector weight;     // R: sum_il G_il U_s(i,c) U_target(l,c)
  };
  struct Want {
    bool shared = false;
    bool target = false;
    bool weight = false;
  };
  // `factors` holds one pointer per modality so a block can be substituted.
  TermEval evaluate_term(std::size_t term, const Matrix& shared,
                         std::span<const Matrix* const> factors, Want want) const;
  double regularizer_of(std::size_t modality, const Matrix& values) const;
  Matrix regularizer_gradient(std::size_t modality) const;

  ModelSpec spec_;
  std::vector<std::string> modalities_;
  std::vector<Term> terms_;
  FactorMatrix shared_;
  std::vector<FactorMatrix> factors_;  // one per modality
  std::vector<Matrix> observed_;       // dense, per modality; empty when restored
  std::vector<std::string> shared_ids_;
  std::vector<std::vector<std::string>> item_ids_;
  std::size_t threads_ = 1;
  TrainReport report_;
};

/// Representation of new patients against frozen modality factors: each row
/// minimizes the model's NLL terms independently (regularizers do not involve
/// the shared factor). Rows cold-start at the training shared factor's column
/// means. `new_obs` must cover every modality with matching datatype and items.
FactorMatrix project_patients(const FittedModel& model, const ObservationSet& new_obs,
                              const SolverConfig& cfg);

}  // namespace chitf
