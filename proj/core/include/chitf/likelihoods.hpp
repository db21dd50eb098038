#pragma once

// Negative log-likelihoods of marginal observations given a marginal
// reconstruction Vhat, their elementwise gradients with respect to Vhat, and
// the erf series used by the Gaussian-binary quantization.
//
// All NLLs are sums over cells. The Poisson-integer constant sum(log v!) is
// dropped.

#include "chitf/tensor.hpp"

#include <optional>
#include <string_view>

namespace chitf {

enum class Distribution { Poisson, Gaussian };
enum class DataType { Integer, Binary, Real };

struct ObservationKind {
  Distribution distribution = Distribution::Poisson;
  DataType datatype = DataType::Integer;

  /// (Poisson, integer|binary) and (Gaussian, real|binary).
  bool valid() const noexcept;
  friend bool operator==(const ObservationKind&, const ObservationKind&) = default;
};

std::string_view to_string(Distribution d) noexcept;
std::string_view to_string(DataType t) noexcept;
Distribution parse_distribution(std::string_view s);
DataType parse_datatype(std::string_view s);

/// Gaussian marginal: each observed cell sums t_n hidden entries of variance sigma2.
struct GaussianParams {
  double sigma2 = 1e-9;
  double t_n = 1.0;

  bool valid() const noexcept { return sigma2 > 0.0 && t_n >= 1.0; }
  /// sqrt(2 t_n) * sigma, the erf argument scale.
  double erf_scale() const;
};

/// Floor applied to Vhat inside logs and denominators, and to Bernoulli p.
inline constexpr double kEpsilon = 1e-12;

double erf_series(double x);
double erf_derivative(double x);

/// Pr(v' = 1) under Poisson quantization: 1 - exp(-vhat).
double poisson_binary_probability(double vhat);
/// Pr(v' = 1) under Gaussian quantization: 1/2 - 1/2 erf(-vhat / (sqrt(2 t_n) sigma)).
double gaussian_binary_probability(double vhat, const GaussianParams& params);

double nll_poisson_integer(ConstMatrixRef v, ConstMatrixRef vhat);
double nll_poisson_binary(ConstMatrixRef vb, ConstMatrixRef vhat);
double nll_gaussian_real(ConstMatrixRef v, ConstMatrixRef vhat, const GaussianParams& params);
double nll_gaussian_binary(ConstMatrixRef vb, ConstMatrixRef vhat, const GaussianParams& params);

/// -sum [b log p + (1-b) log(1-p)], p clamped to [eps, 1 - eps].
double bernoulli_nll(ConstMatrixRef vb, ConstMatrixRef p);

/// Dispatch on kind. `params` is required for Gaussian kinds.
double nll(const ObservationKind& kind, ConstMatrixRef v, ConstMatrixRef vhat,
           const std::optional<GaussianParams>& params = std::nullopt);

/// Elementwise d NLL / d vhat.
Matrix grad_nll_wrt_reconstruction(const ObservationKind& kind, ConstMatrixRef v,
                                   ConstMatrixRef vhat,
                                   const std::optional<GaussianParams>& params = std::nullopt);

/// Fused value and gradient; `grad` is resized to vhat's shape.
double nll_with_gradient(const ObservationKind& kind, ConstMatrixRef v, ConstMatrixRef vhat,
                         const std::optional<GaussianParams>& params, Matrix& grad);

}  // namespace chitf
