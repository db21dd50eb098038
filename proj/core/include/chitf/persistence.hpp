#pragma once

// Model directory layout:
//   spec.json        canonical ModelSpec (with datatypes)
//   shared.csv       entity_id,f1,...,fR (one row per patient)
//   <modality>.csv   entity_id,f1,...,fR (one row per item)
//   trace.json       [{sweep, objective, step_accepted_per_block}, ...]
// Floats carry 17 significant digits, so save/load is lossless.

#include "chitf/model.hpp"
#include "chitf/synth.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace chitf {

void write_factor_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const FactorMatrix& factor);
std::pair<std::vector<std::string>, FactorMatrix> read_factor_csv(const std::filesystem::path& path);

std::string trace_to_json(const TrainReport& report);

void save_model(const std::filesystem::path& dir, const FittedModel& model);
FittedModel load_model(const std::filesystem::path& dir);

/// spec.json plus shared.csv and one factor CSV per modality, ids as in `obs`.
void save_truth(const std::filesystem::path& dir, const SyntheticTruth& truth,
                const ObservationSet& obs);

}  // namespace chitf
