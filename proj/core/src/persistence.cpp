#include "chitf/persistence.hpp"

#include "chitf/csv.hpp"
#include "chitf/data_io.hpp"
#include "chitf/errors.hpp"
#include "chitf/format.hpp"

#include <fstream>
#include <sstream>

namespace chitf {
namespace fs = std::filesystem;

void write_factor_csv(const fs::path& path, const std::vector<std::string>& ids,
                      const FactorMatrix& factor) {
  if (ids.size() != factor.rows()) throw std::invalid_argument("factor ids do not match rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError(path.string(), 0, "cannot write factor file");
  out << "entity_id";
  for (std::size_t r = 0; r < factor.rank(); ++r) out << ",f" << (r + 1);
  out << '\n';
  for (std::size_t i = 0; i < factor.rows(); ++i) {
    out << csv::escape(ids[i]);
    for (std::size_t r = 0; r < factor.rank(); ++r) out << ',' << format_double(factor(i, r));
    out << '\n';
  }
}

std::pair<std::vector<std::string>, FactorMatrix> read_factor_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open factor file");
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path.string(), 1, "missing header");
  const auto header = csv::split(line);
  if (header.size() < 2 || header[0] != "entity_id") {
    throw IngestionError(path.string(), 1, "expected header entity_id,f1,...,fR");
  }
  const std::size_t rank = header.size() - 1;
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != rank + 1) {
      throw IngestionError(path.string(), lineno, "expected " + std::to_string(rank + 1) + " fields");
    }
    ids.push_back(fields[0]);
    for (std::size_t r = 0; r < rank; ++r) {
      double v = 0.0;
      if (!csv::parse_double(fields[r + 1], v) || v < 0.0) {
        throw IngestionError(path.string(), lineno, "invalid factor entry '" + fields[r + 1] + "'");
      }
      values.push_back(v);
    }
  }
  if (ids.empty()) throw IngestionError(path.string(), 0, "factor file has no rows");
  Matrix m = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(ids.size()),
                                      static_cast<Eigen::Index>(rank));
  return {std::move(ids), FactorMatrix(std::move(m))};
}

std::string trace_to_json(const TrainReport& report) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < report.loss_trace.size(); ++i) {
    const auto& rec = report.loss_trace[i];
    out << (i ? ",\n " : "\n ") << "{\"sweep\": " << rec.sweep
        << ", \"objective\": " << format_double(rec.objective) << ", \"step_accepted_per_block\": [";
    for (std::size_t b = 0; b < rec.step_accepted.size(); ++b) {
      out << (b ? ", " : "") << (rec.step_accepted[b] ? "true" : "false");
    }
    out << "]}";
  }
  out << "\n]\n";
  return out.str();
}

void save_model(const fs::path& dir, const FittedModel& model) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json", std::ios::binary);
    if (!out) throw IngestionError((dir / "spec.json").string(), 0, "cannot write");
    out << model_spec_to_json(model.spec());
  }
  write_factor_csv(dir / "shared.csv", model.shared_ids(), model.shared());
  for (std::size_t n = 0; n < model.modalities().size(); ++n) {
    write_factor_csv(dir / (model.modalities()[n] + ".csv"), model.item_ids(n), model.factor(n));
  }
  std::ofstream out(dir / "trace.json", std::ios::binary);
  out << trace_to_json(model.report());
}

FittedModel load_model(const fs::path& dir) {
  const ModelSpec spec = load_model_spec((dir / "spec.json").string());
  auto [shared_ids, shared] = read_factor_csv(dir / "shared.csv");
  std::vector<FactorMatrix> factors;
  std::vector<std::vector<std::string>> item_ids;
  for (const auto& name : spec.modality_order()) {
    auto [ids, factor] = read_factor_csv(dir / (name + ".csv"));
    item_ids.push_back(std::move(ids));
    factors.push_back(std::move(factor));
  }
  return FittedModel::from_factors(spec, std::move(shared), std::move(factors),
                                   std::move(shared_ids), std::move(item_ids));
}

void save_truth(const fs::path& dir, const SyntheticTruth& truth, const ObservationSet& obs) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json", std::ios::binary);
    out << model_spec_to_json(truth.spec);
  }
  write_factor_csv(dir / "shared.csv", shared_ids_of(obs), truth.shared);
  for (std::size_t n = 0; n < truth.modalities.size(); ++n) {
    write_factor_csv(dir / (truth.modalities[n] + ".csv"), obs.at(truth.modalities[n]).item_ids,
                     truth.factors[n]);
  }
}

}  // namespace chitf
