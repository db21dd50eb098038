#pragma once

// Observation ingestion and persistence, binarization, labels and patient
// splits.
//
// On-disk layout (UTF-8, LF):
//   manifest.json      {"patients_path": "...", "modalities": [{name, path, kind, vocab_path}]}
//   <triplets>.csv     patient_id,item_id,value
//   <vocab>.txt        one item id per line
//   patients.txt       one patient id per line (optional)
//   labels.csv         patient_id,label

#include "chitf/observations.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chitf {

/// Throws IngestionError with file and line on malformed rows, unknown ids,
/// duplicate (patient, item) pairs, negative values and datatype violations.
ObservationSet load_observations(const std::filesystem::path& manifest_path);

/// Writes manifest.json, patients.txt and per-modality triplet/vocab files
/// into `dir` (created if missing). Triplets are written sorted by (row, col).
void save_observations(const std::filesystem::path& dir, const ObservationSet& observations);

/// Indicator of v > 0. Binary input is returned unchanged.
ObservationMatrix binarize(const ObservationMatrix& obs);

/// Labels aligned to `shared_ids`. Every patient must be labeled 0 or 1.
std::vector<int> load_labels(const std::filesystem::path& path,
                             const std::vector<std::string>& shared_ids);
void save_labels(const std::filesystem::path& path, const std::vector<std::string>& shared_ids,
                 const std::vector<int>& labels);

struct TrainTestSplit {
  ObservationSet train;
  ObservationSet test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::vector<int> train_labels;  // empty when no labels were given
  std::vector<int> test_labels;
};

/// Seeded patient-level partition applied to every modality. With
/// `stratified`, each label class is split separately at `ratio`.
TrainTestSplit split_train_test(const ObservationSet& observations,
                                const std::vector<int>* labels, double ratio,
                                std::uint64_t seed, bool stratified = false);

/// The split itself, for callers that only need row indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(
    std::size_t count, const std::vector<int>* labels, double ratio, std::uint64_t seed,
    bool stratified);

/// Shared patient ids of an observation set (all modalities agree).
const std::vector<std::string>& shared_ids_of(const ObservationSet& observations);

}  // namespace chitf
