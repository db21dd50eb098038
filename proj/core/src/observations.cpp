#include "chitf/observations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace chitf {

bool value_fits(DataType datatype, double value) noexcept {
  if (!std::isfinite(value) || value < 0.0) return false;
  switch (datatype) {
    case DataType::Integer: return value == std::floor(value);
    case DataType::Binary: return value == 0.0 || value == 1.0;
    case DataType::Real: return true;
  }
  return false;
}

void ObservationMatrix::validate() const {
  std::unordered_set<std::size_t> seen;
  seen.reserve(values.size());
  for (const auto& t : values) {
    if (t.row >= rows() || t.col >= cols()) {
      throw std::invalid_argument(modality + ": triplet (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") out of range");
    }
    if (!seen.insert(t.row * cols() + t.col).second) {
      throw std::invalid_argument(modality + ": duplicate triplet (" + std::to_string(t.row) +
                                  ", " + std::to_string(t.col) + ")");
    }
    if (!value_fits(datatype, t.value)) {
      throw std::invalid_argument(modality + ": value " + std::to_string(t.value) +
                                  " is not valid for datatype " +
                                  std::string(to_string(datatype)));
    }
  }
}

Matrix ObservationMatrix::to_dense() const {
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (const auto& t : values) {
    dense(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  }
  return dense;
}

std::size_t ObservationMatrix::item_index(const std::string& item_id) const {
  const auto it = std::find(item_ids.begin(), item_ids.end(), item_id);
  if (it == item_ids.end()) {
    throw std::out_of_range("modality " + modality + " has no item '" + item_id + "'");
  }
  return static_cast<std::size_t>(it - item_ids.begin());
}

ObservationMatrix from_dense(std::string modality, std::vector<std::string> shared_ids,
                             std::vector<std::string> item_ids, DataType datatype,
                             const Matrix& dense) {
  ObservationMatrix obs{std::move(modality), std::move(shared_ids), std::move(item_ids), datatype,
                        {}};
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        obs.values.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), dense(i, j)});
      }
    }
  }
  return obs;
}

ObservationSet select_patients(const ObservationSet& obs, const std::vector<std::size_t>& rows) {
  ObservationSet out;
  for (const auto& [name, m] : obs) {
    std::vector<std::size_t> remap(m.rows(), static_cast<std::size_t>(-1));
    ObservationMatrix sub;
    sub.modality = m.modality;
    sub.item_ids = m.item_ids;
    sub.datatype = m.datatype;
    sub.shared_ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] >= m.rows()) throw std::out_of_range("patient row out of range");
      remap[rows[k]] = k;
      sub.shared_ids.push_back(m.shared_ids[rows[k]]);
    }
    for (const auto& t : m.values) {
      if (remap[t.row] != static_cast<std::size_t>(-1)) {
        sub.values.push_back({remap[t.row], t.col, t.value});
      }
    }
    std::sort(sub.values.begin(), sub.values.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    out.emplace(name, std::move(sub));
  }
  return out;
}

}  // namespace chitf
