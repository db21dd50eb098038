#pragma once

#include "chitf/likelihoods.hpp"
#include "chitf/tensor.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace chitf {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// One modality's marginal observations: patients x items, sparse.
struct ObservationMatrix {
  std::string modality;
  std::vector<std::string> shared_ids;
  std::vector<std::string> item_ids;
  DataType datatype = DataType::Integer;
  std::vector<Triplet> values;  // implicit zeros

  std::size_t rows() const noexcept { return shared_ids.size(); }
  std::size_t cols() const noexcept { return item_ids.size(); }

  /// Throws std::invalid_argument on out-of-range or duplicate triplets and on
  /// values that violate the datatype.
  void validate() const;
  Matrix to_dense() const;
  /// Column index of an item id; throws std::out_of_range.
  std::size_t item_index(const std::string& item_id) const;
};

using ObservationSet = std::map<std::string, ObservationMatrix>;

/// Whether `value` is admissible for the datatype.
bool value_fits(DataType datatype, double value) noexcept;

/// Rebuild an observation from a dense matrix, dropping zeros.
ObservationMatrix from_dense(std::string modality, std::vector<std::string> shared_ids,
                             std::vector<std::string> item_ids, DataType datatype,
                             const Matrix& dense);

/// Restrict every observation to the given patient rows, in the given order.
ObservationSet select_patients(const ObservationSet& obs, const std::vector<std::size_t>& rows);

}  // namespace chitf
