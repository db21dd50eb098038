#include "chitf/synth.hpp"

#include "chitf/errors.hpp"
#include "chitf/likelihoods.hpp"

#include <algorithm>
#include <cmath>

namespace chitf {
namespace {

// Zero variance is allowed when generating: it makes Gaussian draws exact.
void validate_generating_spec(const ModelSpec& spec) {
  ModelSpec copy = spec;
  for (auto& t : copy.tensors) {
    if (t.distribution == Distribution::Gaussian) {
      if (t.sigma2 < 0.0) throw ConfigError("tensor '" + t.id + "' has negative sigma2");
      if (t.sigma2 == 0.0) t.sigma2 = 1.0;
    }
  }
  copy.validate();
}

double sample_cell(const ObservationKind& kind, double mean, double sd, std::mt19937_64& rng) {
  if (kind.distribution == Distribution::Poisson) {
    if (mean <= 0.0) return 0.0;
    if (kind.datatype == DataType::Binary) {
      std::bernoulli_distribution coin(-std::expm1(-mean));
      return coin(rng) ? 1.0 : 0.0;
    }
    std::poisson_distribution<long long> draw(mean);
    return static_cast<double>(draw(rng));
  }
  double x = mean;
  if (sd > 0.0) x += sd * std::normal_distribution<double>(0.0, 1.0)(rng);
  if (kind.datatype == DataType::Binary) return x > 0.0 ? 1.0 : 0.0;
  return std::max(0.0, x);
}

}  // namespace

void SynthConfig::validate() const {
  validate_generating_spec(spec);
  if (patients == 0) throw ConfigError("synthetic data needs at least one patient");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw ConfigError("sparsity must be in (0, 1]");
  if (!(scale > 0.0)) throw ConfigError("scale must be > 0");
  for (const auto& name : spec.modality_order()) {
    const auto it = items.find(name);
    if (it == items.end() || it->second == 0) {
      throw ConfigError("no item count for modality '" + name + "'");
    }
    if (!datatypes.contains(name)) throw ConfigError("no datatype for modality '" + name + "'");
  }
  for (const auto& t : spec.tensors) {
    for (const auto& m : t.modalities) {
      if (!ObservationKind{t.distribution, datatypes.at(m)}.valid()) {
        throw ConfigError("modality '" + m + "' datatype cannot be modeled by tensor '" + t.id + "'");
      }
    }
  }
}

std::vector<std::string> synthetic_ids(const std::string& prefix, std::size_t count) {
  std::vector<std::string> ids;
  ids.reserve(count);
  const int digits = count > 1 ? static_cast<int>(std::to_string(count - 1).size()) : 1;
  const int width = std::max(prefix == "p" ? 4 : 3, digits);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string digits_of_i = std::to_string(i);
    const std::size_t pad = static_cast<std::size_t>(width) > digits_of_i.size() ? width - digits_of_i.size() : 0;
    ids.push_back(prefix + std::string(pad, '0') + digits_of_i);
  }
  return ids;
}

FactorMatrix plant_factor(std::size_t rows, std::size_t rank, double sparsity, double scale,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::bernoulli_distribution keep(sparsity);
  std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index r = 0; r < m.cols(); ++r) {
      const double v = value(rng);
      if (keep(rng)) m(i, r) = v;
    }
  }
  for (Eigen::Index r = 0; r < m.cols(); ++r) {
    if (m.col(r).isZero(0.0)) m(static_cast<Eigen::Index>(pick(rng)), r) = value(rng) + 0.5;
  }
  return FactorMatrix(m * scale);
}

std::map<std::string, Matrix> planted_means(const SyntheticTruth& truth) {
  std::map<std::string, Matrix> means;
  auto index_of = [&](const std::string& name) {
    for (std::size_t n = 0; n < truth.modalities.size(); ++n) {
      if (truth.modalities[n] == name) return n;
    }
    throw ConfigError("truth lacks modality '" + name + "'");
  };
  for (const auto& t : truth.spec.tensors) {
    std::vector<FactorMatrix> members;
    for (const auto& m : t.modalities) members.push_back(truth.factors[index_of(m)]);
    for (std::size_t k = 0; k < t.modalities.size(); ++k) {
      if (means.contains(t.modalities[k])) continue;
      means.emplace(t.modalities[k], reconstruct_marginal(truth.shared, members, k));
    }
  }
  return means;
}

ObservationSet sample_observations(const SyntheticTruth& truth,
                                   const std::map<std::string, DataType>& datatypes,
                                   std::mt19937_64& rng) {
  const auto means = planted_means(truth);
  const auto patient_ids = synthetic_ids("p", truth.shared.rows());
  std::map<std::string, bool> done;
  ObservationSet out;
  for (const auto& t : truth.spec.tensors) {
    for (const auto& name : t.modalities) {
      if (done[name]) continue;
      done[name] = true;
      const Matrix& mean = means.at(name);
      const ObservationKind kind{t.distribution, datatypes.at(name)};
      double sd = 0.0;
      if (t.distribution == Distribution::Gaussian) {
        double t_n = 0.0;
        for (const auto& other : t.modalities) {
          if (other == name) continue;
          for (std::size_t n = 0; n < truth.modalities.size(); ++n) {
            if (truth.modalities[n] == other) t_n += static_cast<double>(truth.factors[n].rows());
          }
        }
        sd = std::sqrt(std::max(1.0, t_n) * t.sigma2);
      }
      Matrix sampled(mean.rows(), mean.cols());
      for (Eigen::Index i = 0; i < mean.rows(); ++i) {
        for (Eigen::Index j = 0; j < mean.cols(); ++j) sampled(i, j) = sample_cell(kind, mean(i, j), sd, rng);
      }
      out.emplace(name, from_dense(name, patient_ids, synthetic_ids(name + "_", mean.cols()),
                                   kind.datatype, sampled));
    }
  }
  return out;
}

std::pair<ObservationSet, SyntheticTruth> synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  SyntheticTruth truth;
  truth.spec = cfg.spec;
  truth.spec.datatypes = cfg.datatypes;
  truth.seed = seed;
  truth.modalities = cfg.spec.modality_order();
  truth.shared = plant_factor(cfg.patients, cfg.spec.rank, cfg.sparsity, cfg.scale, rng);
  for (const auto& name : truth.modalities) {
    truth.factors.push_back(plant_factor(cfg.items.at(name), cfg.spec.rank, cfg.sparsity, cfg.scale, rng));
  }
  ObservationSet obs = sample_observations(truth, cfg.datatypes, rng);
  return {std::move(obs), std::move(truth)};
}

}  // namespace chitf
