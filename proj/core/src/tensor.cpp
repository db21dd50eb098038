#include "chitf/tensor.hpp"

#include "chitf/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace chitf {
namespace {

void check_entries(const Matrix& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("factor entry must be finite and non-negative, got " +
                                  std::to_string(v));
    }
  }
}

std::size_t common_rank(std::span<const FactorMatrix> factors) {
  if (factors.empty()) throw ConfigError("no factor matrices given");
  const std::size_t rank = factors.front().rank();
  for (std::size_t d = 0; d < factors.size(); ++d) {
    if (factors[d].rank() != rank) {
      throw ConfigError("rank mismatch: factor " + std::to_string(d) + " has rank " +
                        std::to_string(factors[d].rank()) + ", expected " +
                        std::to_string(rank));
    }
  }
  return rank;
}

}  // namespace

FactorMatrix::FactorMatrix(std::size_t rows, std::size_t rank)
    : values_(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rank))) {
  if (rows == 0 || rank == 0) throw ConfigError("factor matrix needs rows >= 1 and rank >= 1");
}

FactorMatrix::FactorMatrix(Matrix values) { assign(std::move(values)); }

void FactorMatrix::assign(Matrix values) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw ConfigError("factor matrix needs rows >= 1 and rank >= 1");
  }
  check_entries(values);
  values_ = std::move(values);
}

void FactorMatrix::assign_projected(const Matrix& values) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw ConfigError("factor matrix needs rows >= 1 and rank >= 1");
  }
  if (!values.allFinite()) throw std::invalid_argument("non-finite factor update");
  values_ = values.cwiseMax(0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  const std::size_t count =
      std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (shape_.empty() || count != values_.size()) {
    throw std::invalid_argument("tensor shape does not match value count");
  }
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    if (index[d] >= shape_[d]) throw std::out_of_range("tensor index out of range");
    flat = flat * shape_[d] + index[d];
  }
  return flat;
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return values_[flat_index(index)];
}

DenseTensor reconstruct_full(std::span<const FactorMatrix> factors, std::size_t cap) {
  const std::size_t rank = common_rank(factors);
  std::vector<std::size_t> shape;
  shape.reserve(factors.size());
  std::size_t total = 1;
  for (const auto& f : factors) {
    shape.push_back(f.rows());
    if (f.rows() != 0 && total > cap / f.rows()) {
      throw OracleScaleError("full reconstruction exceeds the oracle cap of " +
                             std::to_string(cap) + " entries");
    }
    total *= f.rows();
  }
  if (total > cap) {
    throw OracleScaleError("full reconstruction exceeds the oracle cap of " + std::to_string(cap) +
                           " entries");
  }

  // Build outer products mode by mode: partial[flat, r] holds the rank-r
  // product over the modes consumed so far.
  std::vector<double> partial(rank, 1.0);
  std::size_t count = 1;
  for (const auto& f : factors) {
    const std::size_t n = f.rows();
    std::vector<double> next(count * n * rank);
    for (std::size_t flat = 0; flat < count; ++flat) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < rank; ++r) {
          next[(flat * n + i) * rank + r] = partial[flat * rank + r] * f(i, r);
        }
      }
    }
    partial = std::move(next);
    count *= n;
  }

  std::vector<double> values(count, 0.0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rank; ++r) acc += partial[flat * rank + r];
    values[flat] = acc;
  }
  return DenseTensor(std::move(shape), std::move(values));
}

Matrix marginalize(const DenseTensor& tensor, std::pair<std::size_t, std::size_t> keep) {
  const auto& shape = tensor.shape();
  const auto [ka, kb] = keep;
  if (ka >= shape.size() || kb >= shape.size() || ka == kb) {
    throw std::invalid_argument("marginalize: keep modes must be distinct and in range (order " +
                                std::to_string(shape.size()) + ")");
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(shape[ka]),
                            static_cast<Eigen::Index>(shape[kb]));
  std::vector<std::size_t> index(shape.size(), 0);
  const auto& values = tensor.values();
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    out(static_cast<Eigen::Index>(index[ka]), static_cast<Eigen::Index>(index[kb])) += values[flat];
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++index[d] < shape[d]) break;
      index[d] = 0;
    }
  }
  return out;
}

RowVector marginal_scales(std::span<const FactorMatrix> modality_factors, std::size_t target) {
  const std::size_t rank = common_rank(modality_factors);
  if (target >= modality_factors.size()) {
    throw std::invalid_argument("target modality index out of range");
  }
  RowVector scales = RowVector::Ones(static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < modality_factors.size(); ++k) {
    if (k != target) scales.array() *= modality_factors[k].column_sums().array();
  }
  return scales;
}

Matrix reconstruct_marginal(const FactorMatrix& shared,
                            std::span<const FactorMatrix> modality_factors,
                            std::size_t target) {
  const RowVector scales = marginal_scales(modality_factors, target);
  if (shared.rank() != modality_factors.front().rank()) {
    throw ConfigError("rank mismatch between shared factor and modality factors");
  }
  return (shared.values() * scales.asDiagonal()) * modality_factors[target].values().transpose();
}

Matrix reconstruct_slice(std::span<const double> shared_row, const FactorMatrix& factor_a,
                         const FactorMatrix& factor_b) {
  if (factor_a.rank() != factor_b.rank() || shared_row.size() != factor_a.rank()) {
    throw ConfigError("rank mismatch in slice reconstruction");
  }
  const Eigen::Map<const RowVector> row(shared_row.data(),
                                        static_cast<Eigen::Index>(shared_row.size()));
  return (factor_a.values() * row.asDiagonal()) * factor_b.values().transpose();
}

}  // namespace chitf
