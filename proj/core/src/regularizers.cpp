#include "chitf/regularizers.hpp"

#include "chitf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace chitf {

double RegularizerConfig::theta_for(const std::string& modality) const {
  const auto it = theta_per_modality.find(modality);
  return it == theta_per_modality.end() ? theta : it->second;
}

void RegularizerConfig::validate() const {
  if (!(gamma >= 0.0) || !(beta >= 0.0)) throw ConfigError("regularizer weights must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  auto check_theta = [](double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
  };
  check_theta(theta);
  for (const auto& [name, t] : theta_per_modality) check_theta(t);
}

double column_cosine(const Matrix& u, Eigen::Index a, Eigen::Index b) {
  const double na = u.col(a).norm();
  const double nb = u.col(b).norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return u.col(a).dot(u.col(b)) / (na * nb);
}

double elastic_net(const Matrix& u, double gamma, double alpha) {
  if (gamma == 0.0) return 0.0;
  // Entries are non-negative, so the l1 norm is a plain sum.
  return gamma * (alpha * u.squaredNorm() + (1.0 - alpha) * u.sum());
}

Matrix elastic_net_gradient(const Matrix& u, double gamma, double alpha) {
  // l1 subgradient at zero taken from the feasible side: 1.
  return (gamma * (2.0 * alpha * u.array() + (1.0 - alpha))).matrix();
}

double angular_penalty(const Matrix& u, double beta, double theta) {
  if (beta == 0.0) return 0.0;
  double total = 0.0;
  for (Eigen::Index r = 1; r < u.cols(); ++r) {
    for (Eigen::Index s = 0; s < r; ++s) {
      const double h = std::max(0.0, column_cosine(u, r, s) - theta);
      total += h * h;
    }
  }
  return beta * total;
}

Matrix angular_penalty_gradient(const Matrix& u, double beta, double theta) {
  Matrix grad = Matrix::Zero(u.rows(), u.cols());
  if (beta == 0.0) return grad;
  Eigen::VectorXd norms(u.cols());
  for (Eigen::Index r = 0; r < u.cols(); ++r) norms(r) = u.col(r).norm();
  for (Eigen::Index r = 1; r < u.cols(); ++r) {
    for (Eigen::Index s = 0; s < r; ++s) {
      if (norms(r) == 0.0 || norms(s) == 0.0) continue;
      const double c = u.col(r).dot(u.col(s)) / (norms(r) * norms(s));
      const double h = c - theta;
      if (h <= 0.0) continue;
      // d cos / d u_r = u_s / (|u_r||u_s|) - cos * u_r / |u_r|^2
      const double w = 2.0 * beta * h;
      grad.col(r) += w * (u.col(s) / (norms(r) * norms(s)) - c * u.col(r) / (norms(r) * norms(r)));
      grad.col(s) += w * (u.col(r) / (norms(r) * norms(s)) - c * u.col(s) / (norms(s) * norms(s)));
    }
  }
  return grad;
}

double elastic_net(std::span<const FactorMatrix> factors, const RegularizerConfig& cfg) {
  double total = 0.0;
  for (const auto& f : factors) total += elastic_net(f.values(), cfg.gamma, cfg.alpha);
  return total;
}

double angular_penalty(std::span<const FactorMatrix> factors, const RegularizerConfig& cfg,
                       std::span<const std::string> names) {
  double total = 0.0;
  for (std::size_t n = 0; n < factors.size(); ++n) {
    const double theta = n < names.size() ? cfg.theta_for(names[n]) : cfg.theta;
    total += angular_penalty(factors[n].values(), cfg.beta, theta);
  }
  return total;
}

}  // namespace chitf
