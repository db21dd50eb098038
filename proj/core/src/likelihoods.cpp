#include "chitf/likelihoods.hpp"

#include "chitf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chitf {
namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

double floor_eps(double x) { return std::max(x, kEpsilon); }
double clamp_p(double p) { return std::clamp(p, kEpsilon, 1.0 - kEpsilon); }

void check_shapes(ConstMatrixRef a, ConstMatrixRef b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("observation and reconstruction shapes differ: " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

const GaussianParams& require_params(const std::optional<GaussianParams>& params) {
  if (!params || !params->valid()) {
    throw ConfigError("Gaussian likelihood requires sigma2 > 0 and t_n >= 1");
  }
  return *params;
}

// Per-cell value/gradient kernels. Each returns the NLL contribution and
// writes d/dvhat into `g`.

double cell_poisson_integer(double v, double vhat, double& g) {
  if (v == 0.0) {
    g = 1.0;
    return vhat;
  }
  const double vf = floor_eps(vhat);
  g = 1.0 - v / vf;
  return vhat - v * std::log(vf);
}

double cell_poisson_binary(double b, double vhat, double& g) {
  if (b == 0.0) {
    g = 1.0;
    return vhat;
  }
  // -(log(exp(vhat) - 1) - vhat) == -log(1 - exp(-vhat))
  const double p = clamp_p(-std::expm1(-floor_eps(vhat)));
  g = 1.0 - 1.0 / p;
  return -std::log(p);
}

double cell_gaussian_real(double v, double vhat, double variance, double log_norm, double& g) {
  const double r = vhat - v;
  g = r / variance;
  return 0.5 * (log_norm + r * r / variance);
}

double cell_gaussian_binary(double b, double vhat, double scale, double& g) {
  const double z = -vhat / scale;
  const double e = erf_series(z);
  const double p = clamp_p(0.5 - 0.5 * e);
  const double q = clamp_p(0.5 + 0.5 * e);
  const double dp = erf_derivative(z) / (2.0 * scale);
  g = -(b / p - (1.0 - b) / q) * dp;
  return -(b * std::log(p) + (1.0 - b) * std::log(q));
}

template <class Cell>
double accumulate(ConstMatrixRef v, ConstMatrixRef vhat, Matrix* grad, Cell&& cell) {
  check_shapes(v, vhat);
  if (grad) grad->resize(vhat.rows(), vhat.cols());
  double total = 0.0;
  double g = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      row += cell(v(i, j), vhat(i, j), g);
      if (grad) (*grad)(i, j) = g;
    }
    total += row;
  }
  return total;
}

double dispatch(const ObservationKind& kind, ConstMatrixRef v, ConstMatrixRef vhat,
                const std::optional<GaussianParams>& params, Matrix* grad) {
  if (!kind.valid()) throw ConfigError("invalid distribution/datatype pairing");
  if (kind.distribution == Distribution::Poisson) {
    if (kind.datatype == DataType::Integer) {
      return accumulate(v, vhat, grad, cell_poisson_integer);
    }
    return accumulate(v, vhat, grad, cell_poisson_binary);
  }
  const GaussianParams& gp = require_params(params);
  if (kind.datatype == DataType::Real) {
    const double variance = gp.t_n * gp.sigma2;
    const double log_norm = std::log(2.0 * std::numbers::pi * variance);
    return accumulate(v, vhat, grad, [&](double a, double b, double& g) {
      return cell_gaussian_real(a, b, variance, log_norm, g);
    });
  }
  const double scale = gp.erf_scale();
  return accumulate(v, vhat, grad, [&](double a, double b, double& g) {
    return cell_gaussian_binary(a, b, scale, g);
  });
}

}  // namespace

bool ObservationKind::valid() const noexcept {
  if (distribution == Distribution::Poisson) {
    return datatype == DataType::Integer || datatype == DataType::Binary;
  }
  return datatype == DataType::Real || datatype == DataType::Binary;
}

std::string_view to_string(Distribution d) noexcept {
  return d == Distribution::Poisson ? "poisson" : "gaussian";
}

std::string_view to_string(DataType t) noexcept {
  switch (t) {
    case DataType::Integer: return "integer";
    case DataType::Binary: return "binary";
    case DataType::Real: return "real";
  }
  return "integer";
}

Distribution parse_distribution(std::string_view s) {
  if (s == "poisson" || s == "Poisson") return Distribution::Poisson;
  if (s == "gaussian" || s == "Gaussian") return Distribution::Gaussian;
  throw ConfigError("unknown distribution '" + std::string(s) + "' (expected poisson|gaussian)");
}

DataType parse_datatype(std::string_view s) {
  if (s == "integer" || s == "count") return DataType::Integer;
  if (s == "binary") return DataType::Binary;
  if (s == "real") return DataType::Real;
  throw ConfigError("unknown datatype '" + std::string(s) + "' (expected integer|binary|real)");
}

double GaussianParams::erf_scale() const { return std::sqrt(2.0 * t_n) * std::sqrt(sigma2); }

double erf_series(double x) {
  if (x >= 6.0) return 1.0;
  if (x <= -6.0) return -1.0;
  if (x == 0.0) return 0.0;
  const long double xl = x;
  const long double x2 = xl * xl;
  long double sum = xl;
  if (std::fabs(x) <= 3.0) {
    // Maclaurin: 2/sqrt(pi) * sum_k (-1)^k x^(2k+1) / (k! (2k+1)).
    long double power = xl;  // (-1)^k x^(2k+1) / k!
    for (int k = 1; k < 1000; ++k) {
      power *= -x2 / static_cast<long double>(k);
      const long double term = power / static_cast<long double>(2 * k + 1);
      sum += term;
      if (std::fabs(static_cast<double>(term)) * kTwoOverSqrtPi < 1e-15) break;
    }
  } else {
    // The alternating series cancels badly out here. Same function, positive terms:
    // 2/sqrt(pi) * exp(-x^2) * sum_k 2^k x^(2k+1) / (2k+1)!!.
    long double term = xl;
    for (int k = 1; k < 1000; ++k) {
      term *= 2.0L * x2 / static_cast<long double>(2 * k + 1);
      sum += term;
      if (std::fabs(term) < 1e-20L * std::fabs(sum)) break;
    }
    sum *= std::exp(-x2);
  }
  const double result = static_cast<double>(sum * static_cast<long double>(kTwoOverSqrtPi));
  return std::clamp(result, -1.0, 1.0);
}

double erf_derivative(double x) { return kTwoOverSqrtPi * std::exp(-x * x); }

double poisson_binary_probability(double vhat) { return -std::expm1(-vhat); }

double gaussian_binary_probability(double vhat, const GaussianParams& params) {
  return 0.5 - 0.5 * erf_series(-vhat / params.erf_scale());
}

double nll_poisson_integer(ConstMatrixRef v, ConstMatrixRef vhat) {
  return dispatch({Distribution::Poisson, DataType::Integer}, v, vhat, std::nullopt, nullptr);
}

double nll_poisson_binary(ConstMatrixRef vb, ConstMatrixRef vhat) {
  return dispatch({Distribution::Poisson, DataType::Binary}, vb, vhat, std::nullopt, nullptr);
}

double nll_gaussian_real(ConstMatrixRef v, ConstMatrixRef vhat, const GaussianParams& params) {
  return dispatch({Distribution::Gaussian, DataType::Real}, v, vhat, params, nullptr);
}

double nll_gaussian_binary(ConstMatrixRef vb, ConstMatrixRef vhat, const GaussianParams& params) {
  return dispatch({Distribution::Gaussian, DataType::Binary}, vb, vhat, params, nullptr);
}

double bernoulli_nll(ConstMatrixRef vb, ConstMatrixRef p) {
  check_shapes(vb, p);
  double total = 0.0;
  for (Eigen::Index i = 0; i < vb.rows(); ++i) {
    for (Eigen::Index j = 0; j < vb.cols(); ++j) {
      const double pc = clamp_p(p(i, j));
      const double b = vb(i, j);
      total -= b * std::log(pc) + (1.0 - b) * std::log1p(-pc);
    }
  }
  return total;
}

double nll(const ObservationKind& kind, ConstMatrixRef v, ConstMatrixRef vhat,
           const std::optional<GaussianParams>& params) {
  return dispatch(kind, v, vhat, params, nullptr);
}

Matrix grad_nll_wrt_reconstruction(const ObservationKind& kind, ConstMatrixRef v,
                                   ConstMatrixRef vhat,
                                   const std::optional<GaussianParams>& params) {
  Matrix grad;
  dispatch(kind, v, vhat, params, &grad);
  return grad;
}

double nll_with_gradient(const ObservationKind& kind, ConstMatrixRef v, ConstMatrixRef vhat,
                         const std::optional<GaussianParams>& params, Matrix& grad) {
  return dispatch(kind, v, vhat, params, &grad);
}

}  // namespace chitf
