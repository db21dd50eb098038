#pragma once

// Synthetic observations with planted ground truth. Observations are drawn
// from their marginal laws directly: Poisson(Vhat), Bernoulli(1 - exp(-Vhat)),
// N(Vhat, t_n sigma2) clipped at zero, or the indicator of that Gaussian.

#include "chitf/model_spec.hpp"
#include "chitf/observations.hpp"
#include "chitf/tensor.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace chitf {

struct SynthConfig {
  ModelSpec spec;                               // generating structure; sigma2 may be 0
  std::size_t patients = 100;
  std::map<std::string, std::size_t> items;     // item count per modality
  std::map<std::string, DataType> datatypes;    // observation datatype per modality
  double sparsity = 0.5;                        // fraction of non-zero planted entries, (0, 1]
  double scale = 1.0;                           // per-column multiplier, > 0

  void validate() const;
};

struct SyntheticTruth {
  ModelSpec spec;
  std::vector<std::string> modalities;  // spec.modality_order()
  FactorMatrix shared;
  std::vector<FactorMatrix> factors;    // aligned with `modalities`
  std::uint64_t seed = 0;
};

/// Uniform entries, Bernoulli(sparsity) mask, column scale. Every column keeps
/// at least one non-zero entry.
FactorMatrix plant_factor(std::size_t rows, std::size_t rank, double sparsity, double scale,
                          std::mt19937_64& rng);

/// Marginal mean of each modality under the first tensor (spec order) that
/// references it.
std::map<std::string, Matrix> planted_means(const SyntheticTruth& truth);

/// Sample observations from planted factors.
ObservationSet sample_observations(const SyntheticTruth& truth,
                                   const std::map<std::string, DataType>& datatypes,
                                   std::mt19937_64& rng);

/// Plant factors from `cfg` and sample observations, all from one seed.
std::pair<ObservationSet, SyntheticTruth> synth_generate(const SynthConfig& cfg, std::uint64_t seed);

/// Patient ids "p0000", ..., item ids "<modality>_000", ...
std::vector<std::string> synthetic_ids(const std::string& prefix, std::size_t count);

}  // namespace chitf
