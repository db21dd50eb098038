#include "chitf/model.hpp"

#include "chitf/errors.hpp"
#include "chitf/parallel.hpp"
#include "chitf/projected_step.hpp"
#include "chitf/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace chitf {
namespace {

// Fixed row partition for loss/gradient evaluation. Partial results are
// reduced in chunk order, so values do not depend on the thread count.
constexpr Eigen::Index kChunkRows = 256;

Matrix uniform_open01(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double v = 0.0;
    while (v == 0.0) v = dist(rng);
    m.data()[i] = v;
  }
  return m;
}

void check_kind(const InteractionTensorSpec& tensor, const std::string& modality, DataType type) {
  const ObservationKind kind{tensor.distribution, type};
  if (!kind.valid()) {
    throw ConfigError("modality '" + modality + "' has datatype " +
                      std::string(to_string(type)) + ", which tensor '" + tensor.id + "' (" +
                      std::string(to_string(tensor.distribution)) + ") cannot model");
  }
}

}  // namespace

double ObjectiveParts::total() const {
  double sum = 0.0;
  for (double t : terms) sum += t;
  for (double r : regularizer) sum += r;
  return sum;
}

FittedModel FittedModel::build(const ModelSpec& spec, const ObservationSet& observations) {
  spec.validate();
  FittedModel model;
  model.spec_ = spec;
  model.modalities_ = spec.modality_order();

  const ObservationMatrix* first = nullptr;
  for (const auto& name : model.modalities_) {
    const auto it = observations.find(name);
    if (it == observations.end()) {
      throw ConfigError("model references modality '" + name + "' with no observation matrix");
    }
    const ObservationMatrix& obs = it->second;
    try {
      obs.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("modality '") + name + "': " + e.what());
    }
    if (obs.rows() == 0 || obs.cols() == 0) {
      throw ConfigError("modality '" + name + "' has an empty observation matrix");
    }
    if (first == nullptr) {
      first = &obs;
    } else if (obs.shared_ids != first->shared_ids) {
      throw ConfigError("modality '" + name + "' does not share patient ids with modality '" +
                        first->modality + "'");
    }
    const auto declared = spec.datatypes.find(name);
    if (declared != spec.datatypes.end() && declared->second != obs.datatype) {
      throw ConfigError("modality '" + name + "' declared " +
                        std::string(to_string(declared->second)) + " but observed " +
                        std::string(to_string(obs.datatype)));
    }
    model.spec_.datatypes[name] = obs.datatype;
  }
  for (const auto& t : spec.tensors) {
    for (const auto& m : t.modalities) check_kind(t, m, observations.at(m).datatype);
  }

  model.shared_ids_ = first->shared_ids;
  std::mt19937_64 rng(spec.seed);
  model.shared_.assign(uniform_open01(first->rows(), spec.rank, rng));
  for (const auto& name : model.modalities_) {
    const ObservationMatrix& obs = observations.at(name);
    model.factors_.emplace_back(uniform_open01(obs.cols(), spec.rank, rng));
    model.observed_.push_back(obs.to_dense());
    model.item_ids_.push_back(obs.item_ids);
  }
  model.build_terms();
  model.report_.blocks.push_back("shared");
  for (const auto& name : model.modalities_) model.report_.blocks.push_back(name);
  return model;
}

FittedModel FittedModel::from_factors(const ModelSpec& spec, FactorMatrix shared,
                                      std::vector<FactorMatrix> modality_factors,
                                      std::vector<std::string> shared_ids,
                                      std::vector<std::vector<std::string>> item_ids) {
  spec.validate();
  FittedModel model;
  model.spec_ = spec;
  model.modalities_ = spec.modality_order();
  if (modality_factors.size() != model.modalities_.size() ||
      item_ids.size() != model.modalities_.size()) {
    throw ConfigError("stored factors do not match the modalities of the model spec");
  }
  if (shared.rank() != spec.rank) throw ConfigError("shared factor rank differs from spec rank");
  for (std::size_t n = 0; n < modality_factors.size(); ++n) {
    if (modality_factors[n].rank() != spec.rank) {
      throw ConfigError("factor '" + model.modalities_[n] + "' rank differs from spec rank");
    }
    if (item_ids[n].size() != modality_factors[n].rows()) {
      throw ConfigError("factor '" + model.modalities_[n] + "' item ids do not match its rows");
    }
    if (!spec.datatypes.contains(model.modalities_[n])) {
      throw ConfigError("model spec has no datatype for modality '" + model.modalities_[n] + "'");
    }
  }
  if (shared_ids.size() != shared.rows()) throw ConfigError("shared ids do not match shared rows");
  for (const auto& t : spec.tensors) {
    for (const auto& m : t.modalities) check_kind(t, m, spec.datatypes.at(m));
  }
  model.shared_ = std::move(shared);
  model.factors_ = std::move(modality_factors);
  model.shared_ids_ = std::move(shared_ids);
  model.item_ids_ = std::move(item_ids);
  model.build_terms();
  model.report_.blocks.push_back("shared");
  for (const auto& name : model.modalities_) model.report_.blocks.push_back(name);
  return model;
}

void FittedModel::build_terms() {
  terms_.clear();
  for (std::size_t m = 0; m < spec_.tensors.size(); ++m) {
    const auto& tensor = spec_.tensors[m];
    std::vector<std::size_t> members;
    for (const auto& name : tensor.modalities) members.push_back(modality_index(name));
    for (std::size_t target : members) {
      Term term;
      term.tensor = m;
      term.target = target;
      term.members = members;
      term.kind = {tensor.distribution, spec_.datatypes.at(modalities_[target])};
      if (tensor.distribution == Distribution::Gaussian) {
        double t_n = 0.0;
        for (std::size_t k : members) {
          if (k != target) t_n += static_cast<double>(factors_[k].rows());
        }
        // A single-modality tensor has one hidden entry per observed cell.
        term.gaussian = GaussianParams{tensor.sigma2, std::max(1.0, t_n)};
      }
      terms_.push_back(std::move(term));
    }
  }
}

std::size_t FittedModel::modality_index(const std::string& name) const {
  const auto it = std::find(modalities_.begin(), modalities_.end(), name);
  if (it == modalities_.end()) throw ConfigError("unknown modality '" + name + "'");
  return static_cast<std::size_t>(it - modalities_.begin());
}

BlockId FittedModel::block_id(const std::string& block) const {
  if (block == "shared") return BlockId::shared();
  return BlockId::of_modality(modality_index(block));
}

const Matrix& FittedModel::block_values(BlockId block) const {
  return block.is_shared ? shared_.values() : factors_.at(block.modality).values();
}

void FittedModel::set_block(BlockId block, const Matrix& values) {
  const Matrix& current = block_values(block);
  if (values.rows() != current.rows() || values.cols() != current.cols()) {
    throw std::invalid_argument("block update changes shape");
  }
  if (block.is_shared) {
    shared_.assign_projected(values);
  } else {
    factors_.at(block.modality).assign_projected(values);
  }
}

void FittedModel::set_shared(FactorMatrix shared) {
  if (shared.rows() != shared_.rows() || shared.rank() != shared_.rank()) {
    throw std::invalid_argument("shared factor update changes shape");
  }
  shared_ = std::move(shared);
}

void FittedModel::set_factor(std::size_t modality, FactorMatrix factor) {
  FactorMatrix& slot = factors_.at(modality);
  if (factor.rows() != slot.rows() || factor.rank() != slot.rank()) {
    throw std::invalid_argument("factor update changes shape");
  }
  slot = std::move(factor);
}

std::vector<std::size_t> FittedModel::terms_touching(BlockId block) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& members = terms_[t].members;
    if (block.is_shared ||
        std::find(members.begin(), members.end(), block.modality) != members.end()) {
      out.push_back(t);
    }
  }
  return out;
}

Matrix FittedModel::reconstruct(std::size_t term) const {
  const Term& t = terms_.at(term);
  std::vector<FactorMatrix> members;
  std::size_t target = 0;
  for (std::size_t k = 0; k < t.members.size(); ++k) {
    if (t.members[k] == t.target) target = k;
    members.push_back(factors_[t.members[k]]);
  }
  return reconstruct_marginal(shared_, members, target);
}

FittedModel::TermEval FittedModel::evaluate_term(std::size_t term, const Matrix& shared,
                                                 std::span<const Matrix* const> factors,
                                                 Want want) const {
  if (!has_observations()) throw ConfigError("model has no observations attached");
  const Term& t = terms_.at(term);
  const Matrix& target = *factors[t.target];
  const Eigen::Index rank = static_cast<Eigen::Index>(spec_.rank);

  RowVector scales = RowVector::Ones(rank);
  for (std::size_t k : t.members) {
    if (k != t.target) scales.array() *= factors[k]->colwise().sum().array();
  }
  const Matrix target_scaled = target * scales.asDiagonal();
  const Matrix& observed = observed_[t.target];

  const Eigen::Index rows = shared.rows();
  const std::size_t chunks = static_cast<std::size_t>((rows + kChunkRows - 1) / kChunkRows);
  const bool need_grad = want.shared || want.target || want.weight;

  TermEval eval;
  if (want.shared) eval.grad_shared.resize(rows, rank);
  std::vector<double> values(chunks, 0.0);
  std::vector<Matrix> target_parts(want.target ? chunks : 0);
  std::vector<RowVector> weight_parts(want.weight ? chunks : 0);

  parallel_for(chunks, threads_, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunkRows;
    const Eigen::Index n = std::min(kChunkRows, rows - begin);
    const auto us = shared.middleRows(begin, n);
    const Matrix vhat = us * target_scaled.transpose();
    if (!need_grad) {
      values[c] = nll(t.kind, observed.middleRows(begin, n), vhat, t.gaussian);
      return;
    }
    Matrix g;
    values[c] = nll_with_gradient(t.kind, observed.middleRows(begin, n), vhat, t.gaussian, g);
    if (want.shared) eval.grad_shared.middleRows(begin, n) = g * target_scaled;
    if (want.target) target_parts[c] = (g.transpose() * us) * scales.asDiagonal();
    if (want.weight) weight_parts[c] = us.cwiseProduct(g * target).colwise().sum();
  });

  for (double v : values) eval.value += v;
  if (want.target) {
    eval.grad_target = Matrix::Zero(target.rows(), rank);
    for (const auto& part : target_parts) eval.grad_target += part;
  }
  if (want.weight) {
    eval.weight = RowVector::Zero(rank);
    for (const auto& part : weight_parts) eval.weight += part;
  }
  return eval;
}

double FittedModel::regularizer_of(std::size_t modality, const Matrix& values) const {
  const auto& reg = spec_.regularizer;
  return elastic_net(values, reg.gamma, reg.alpha) +
         angular_penalty(values, reg.beta, reg.theta_for(modalities_[modality]));
}

Matrix FittedModel::regularizer_gradient(std::size_t modality) const {
  const auto& reg = spec_.regularizer;
  const Matrix& u = factors_[modality].values();
  Matrix grad = Matrix::Zero(u.rows(), u.cols());
  if (reg.gamma != 0.0) grad += elastic_net_gradient(u, reg.gamma, reg.alpha);
  if (reg.beta != 0.0) {
    grad += angular_penalty_gradient(u, reg.beta, reg.theta_for(modalities_[modality]));
  }
  return grad;
}

double FittedModel::term_nll(std::size_t term) const {
  std::vector<const Matrix*> ptrs;
  for (const auto& f : factors_) ptrs.push_back(&f.values());
  return evaluate_term(term, shared_.values(), ptrs, {}).value;
}

double FittedModel::regularizer_value(std::size_t modality) const {
  return regularizer_of(modality, factors_.at(modality).values());
}

ObjectiveParts FittedModel::objective_parts() const {
  ObjectiveParts parts;
  std::vector<const Matrix*> ptrs;
  for (const auto& f : factors_) ptrs.push_back(&f.values());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    parts.terms.push_back(evaluate_term(t, shared_.values(), ptrs, {}).value);
  }
  for (std::size_t n = 0; n < factors_.size(); ++n) {
    parts.regularizer.push_back(regularizer_value(n));
  }
  return parts;
}

double FittedModel::objective() const { return objective_parts().total(); }

ObjectiveParts FittedModel::objective_parts_with(BlockId block, const Matrix& candidate,
                                                 const ObjectiveParts& base) const {
  ObjectiveParts parts = base;
  std::vector<const Matrix*> ptrs;
  for (const auto& f : factors_) ptrs.push_back(&f.values());
  const Matrix* shared = &shared_.values();
  if (block.is_shared) {
    shared = &candidate;
  } else {
    ptrs.at(block.modality) = &candidate;
  }
  for (std::size_t t : terms_touching(block)) {
    parts.terms[t] = evaluate_term(t, *shared, ptrs, {}).value;
  }
  if (!block.is_shared) parts.regularizer[block.modality] = regularizer_of(block.modality, candidate);
  return parts;
}

Matrix FittedModel::gradient_block(BlockId block) const {
  std::vector<const Matrix*> ptrs;
  for (const auto& f : factors_) ptrs.push_back(&f.values());
  const Matrix& current = block_values(block);
  Matrix grad = Matrix::Zero(current.rows(), current.cols());

  for (std::size_t ti : terms_touching(block)) {
    const Term& t = terms_[ti];
    if (block.is_shared) {
      grad += evaluate_term(ti, shared_.values(), ptrs, {.shared = true}).grad_shared;
    } else if (t.target == block.modality) {
      grad += evaluate_term(ti, shared_.values(), ptrs, {.target = true}).grad_target;
    } else {
      // The block enters only through its column sums, so every row of the
      // gradient is the same R-vector.
      RowVector w = evaluate_term(ti, shared_.values(), ptrs, {.weight = true}).weight;
      for (std::size_t k : t.members) {
        if (k != t.target && k != block.modality) w.array() *= factors_[k].column_sums().array();
      }
      grad.rowwise() += w;
    }
  }
  if (!block.is_shared) grad += regularizer_gradient(block.modality);
  return grad;
}

Matrix FittedModel::gradient_block(const std::string& block) const {
  return gradient_block(block_id(block));
}

FactorMatrix project_patients(const FittedModel& model, const ObservationSet& new_obs,
                              const SolverConfig& cfg) {
  cfg.validate();
  const auto& names = model.modalities();
  const ObservationMatrix* first = nullptr;
  std::vector<Matrix> observed;
  for (std::size_t n = 0; n < names.size(); ++n) {
    const auto it = new_obs.find(names[n]);
    if (it == new_obs.end()) {
      throw ConfigError("projection input lacks modality '" + names[n] + "'");
    }
    const ObservationMatrix& obs = it->second;
    if (obs.datatype != model.spec().datatypes.at(names[n])) {
      throw ConfigError("modality '" + names[n] + "' datatype differs from training");
    }
    if (obs.cols() != model.factor(n).rows()) {
      throw ConfigError("modality '" + names[n] + "' has " + std::to_string(obs.cols()) +
                        " items, model has " + std::to_string(model.factor(n).rows()));
    }
    if (first == nullptr) {
      first = &obs;
    } else if (obs.shared_ids != first->shared_ids) {
      throw ConfigError("modality '" + names[n] + "' patient ids differ from '" + first->modality +
                        "'");
    }
    observed.push_back(obs.to_dense());
  }

  // Each term's reconstruction row is u * loading^T with loading = U_target * diag(scales).
  struct RowTerm {
    const Term* term;
    Matrix loading;
  };
  std::vector<RowTerm> row_terms;
  for (const auto& t : model.terms()) {
    RowVector scales = RowVector::Ones(static_cast<Eigen::Index>(model.rank()));
    for (std::size_t k : t.members) {
      if (k != t.target) scales.array() *= model.factor(k).column_sums().array();
    }
    row_terms.push_back({&t, model.factor(t.target).values() * scales.asDiagonal()});
  }

  const std::size_t patients = first->rows();
  const Eigen::Index rank = static_cast<Eigen::Index>(model.rank());
  const RowVector start = model.shared().values().colwise().mean();
  Matrix out(static_cast<Eigen::Index>(patients), rank);

  parallel_for(patients, cfg.effective_threads(), [&](std::size_t p) {
    const Eigen::Index i = static_cast<Eigen::Index>(p);
    auto objective = [&](const Matrix& u) {
      double f = 0.0;
      for (std::size_t k = 0; k < row_terms.size(); ++k) {
        const Term& t = *row_terms[k].term;
        const Matrix vhat = u * row_terms[k].loading.transpose();
        f += nll(t.kind, observed[t.target].row(i), vhat, t.gaussian);
      }
      return f;
    };
    auto gradient = [&](const Matrix& u) {
      Matrix g = Matrix::Zero(1, rank);
      for (std::size_t k = 0; k < row_terms.size(); ++k) {
        const Term& t = *row_terms[k].term;
        const Matrix vhat = u * row_terms[k].loading.transpose();
        g += grad_nll_wrt_reconstruction(t.kind, observed[t.target].row(i), vhat, t.gaussian) *
             row_terms[k].loading;
      }
      return g;
    };
    Matrix u = start;
    double f = objective(u);
    for (std::size_t it = 0; it < cfg.max_sweeps; ++it) {
      StepResult step = projected_step(u, f, gradient(u), objective, cfg);
      if (!step.accepted) break;
      const double change = std::abs(f - step.objective) / std::max(1.0, std::abs(f));
      u = std::move(step.values);
      f = step.objective;
      if (change < cfg.tol) break;
    }
    out.row(i) = u;
  });
  return FactorMatrix(out.cwiseMax(0.0));
}

}  // namespace chitf
