#pragma once

// Dense factor storage and the reconstruction / marginalization algebra.
//
// Conventions: a CP model of order D is an ordered list of factor matrices
// U_1..U_D sharing a rank R. Entry (i1, ..., iD) of the reconstruction is
// sum_r prod_d U_d(i_d, r). Marginal reconstructions never materialize the
// tensor; DenseTensor exists only to validate that algebra at small sizes.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace chitf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using MatrixRef = Eigen::Ref<Matrix>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;

/// Non-negative I x R latent factor block.
///
/// Every mutation goes through a checked path so the non-negativity invariant
/// holds for any FactorMatrix that exists.
class FactorMatrix {
 public:
  FactorMatrix() = default;
  /// Zero-filled rows x rank block.
  FactorMatrix(std::size_t rows, std::size_t rank);
  /// Throws ConfigError on empty shape, std::invalid_argument on negative or
  /// non-finite entries.
  explicit FactorMatrix(Matrix values);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  bool empty() const noexcept { return values_.size() == 0; }

  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t r) const { return values_(i, r); }

  /// Replace contents; same checks as the constructor. Shape may change.
  void assign(Matrix values);
  /// Replace contents with max(0, values), no further checks beyond finiteness.
  void assign_projected(const Matrix& values);

  /// e^T U: per-column sums.
  RowVector column_sums() const { return values_.colwise().sum(); }

 private:
  Matrix values_;
};

/// Row-major dense tensor; last index varies fastest.
class DenseTensor {
 public:
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }

  double at(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

inline constexpr std::size_t kDefaultOracleCap = 10'000'000;

/// Full CP reconstruction. Throws ConfigError on rank mismatch and
/// OracleScaleError when the entry count exceeds `cap`.
DenseTensor reconstruct_full(std::span<const FactorMatrix> factors,
                             std::size_t cap = kDefaultOracleCap);

/// Sum over every mode except the two kept ones. result(a, b) has `a` running
/// over keep.first and `b` over keep.second. An order-2 tensor kept in
/// (1, 0) order comes back transposed.
Matrix marginalize(const DenseTensor& tensor, std::pair<std::size_t, std::size_t> keep);

/// Product of column sums of every modality factor except `target`.
/// Empty product (single modality) is all ones.
RowVector marginal_scales(std::span<const FactorMatrix> modality_factors, std::size_t target);

/// U^(s) * prod_{k != target} diag(e^T U^(k)) * U^(target)^T, an I_s x I_target
/// matrix, computed without forming the tensor.
Matrix reconstruct_marginal(const FactorMatrix& shared,
                            std::span<const FactorMatrix> modality_factors,
                            std::size_t target);

/// A * diag(shared_row) * B^T: the slice obtained by fixing the shared index.
Matrix reconstruct_slice(std::span<const double> shared_row, const FactorMatrix& factor_a,
                         const FactorMatrix& factor_b);

}  // namespace chitf
