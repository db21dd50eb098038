#pragma once

// Elastic-net (sparsity) and pairwise angular (diversity) penalties on
// modality factor matrices. The shared patient factor is never regularized.

#include "chitf/tensor.hpp"

#include <map>
#include <span>
#include <string>

namespace chitf {

struct RegularizerConfig {
  double gamma = 1e-5;
  double alpha = 0.7;
  double beta = 1.0;
  double theta = 0.5;                                  // default for every modality
  std::map<std::string, double> theta_per_modality;    // overrides by name

  double theta_for(const std::string& modality) const;
  /// Throws ConfigError when a weight is negative or alpha/theta leave [0, 1].
  void validate() const;
};

/// Cosine between two columns; 0 when either is identically zero.
double column_cosine(const Matrix& u, Eigen::Index a, Eigen::Index b);

// Single-factor forms.
double elastic_net(const Matrix& u, double gamma, double alpha);
Matrix elastic_net_gradient(const Matrix& u, double gamma, double alpha);
double angular_penalty(const Matrix& u, double beta, double theta);
Matrix angular_penalty_gradient(const Matrix& u, double beta, double theta);

// List forms over modality factors. `names` selects per-modality thresholds;
// when empty, cfg.theta is used for every factor.
double elastic_net(std::span<const FactorMatrix> factors, const RegularizerConfig& cfg);
double angular_penalty(std::span<const FactorMatrix> factors, const RegularizerConfig& cfg,
                       std::span<const std::string> names = {});

}  // namespace chitf
