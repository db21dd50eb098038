#include "chitf/data_io.hpp"

#include "chitf/csv.hpp"
#include "chitf/errors.hpp"
#include "chitf/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace chitf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open file");
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen.insert(line).second) {
      throw IngestionError(path.string(), lineno, "duplicate id '" + line + "'");
    }
    ids.push_back(line);
  }
  return ids;
}

void write_id_list(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError(path.string(), 0, "cannot write file");
  for (const auto& id : ids) out << id << '\n';
}

struct RawTriplet {
  std::string patient;
  std::size_t col;
  double value;
  std::size_t line;
};

struct RawModality {
  std::string name;
  DataType datatype;
  fs::path path;
  std::vector<std::string> items;
  std::vector<RawTriplet> triplets;
};

RawModality read_modality(const json& entry, const fs::path& base) {
  RawModality raw;
  raw.name = entry.at("name").get<std::string>();
  raw.datatype = parse_datatype(entry.at("kind").get<std::string>());
  raw.path = base / entry.at("path").get<std::string>();
  raw.items = read_id_list(base / entry.at("vocab_path").get<std::string>());

  std::unordered_map<std::string, std::size_t> item_index;
  for (std::size_t j = 0; j < raw.items.size(); ++j) item_index.emplace(raw.items[j], j);

  std::ifstream in(raw.path);
  if (!in) throw IngestionError(raw.path.string(), 0, "cannot open observation file");
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (lineno == 1 && !fields.empty() && fields[0] == "patient_id") continue;
    if (fields.size() != 3) {
      throw IngestionError(raw.path.string(), lineno, "expected patient_id,item_id,value");
    }
    const auto it = item_index.find(fields[1]);
    if (it == item_index.end()) {
      throw IngestionError(raw.path.string(), lineno, "item '" + fields[1] + "' not in vocabulary");
    }
    double value = 0.0;
    if (!csv::parse_double(fields[2], value)) {
      throw IngestionError(raw.path.string(), lineno, "value '" + fields[2] + "' is not a number");
    }
    if (value < 0.0) {
      throw IngestionError(raw.path.string(), lineno, "negative value " + fields[2]);
    }
    if (!value_fits(raw.datatype, value)) {
      throw IngestionError(raw.path.string(), lineno,
                           "value " + fields[2] + " violates declared kind " +
                               std::string(to_string(raw.datatype)));
    }
    if (!seen.insert(fields[0] + '\x1f' + fields[1]).second) {
      throw IngestionError(raw.path.string(), lineno,
                           "duplicate triplet for (" + fields[0] + ", " + fields[1] + ")");
    }
    raw.triplets.push_back({fields[0], it->second, value, lineno});
  }
  return raw;
}

}  // namespace

ObservationSet load_observations(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IngestionError(manifest_path.string(), 0, "cannot open manifest");
  const fs::path base = manifest_path.parent_path();
  std::vector<RawModality> raws;
  std::optional<std::vector<std::string>> declared_patients;
  try {
    const json manifest = json::parse(in);
    if (manifest.contains("patients_path")) {
      declared_patients = read_id_list(base / manifest.at("patients_path").get<std::string>());
    }
    for (const auto& entry : manifest.at("modalities")) raws.push_back(read_modality(entry, base));
  } catch (const json::exception& e) {
    throw IngestionError(manifest_path.string(), 0, e.what());
  } catch (const ConfigError& e) {
    throw IngestionError(manifest_path.string(), 0, e.what());
  }

  std::vector<std::string> patients;
  std::unordered_map<std::string, std::size_t> patient_index;
  if (declared_patients) {
    patients = *declared_patients;
    for (std::size_t i = 0; i < patients.size(); ++i) patient_index.emplace(patients[i], i);
  } else {
    for (const auto& raw : raws) {
      for (const auto& t : raw.triplets) {
        if (patient_index.emplace(t.patient, patients.size()).second) patients.push_back(t.patient);
      }
    }
  }

  ObservationSet out;
  for (auto& raw : raws) {
    ObservationMatrix obs;
    obs.modality = raw.name;
    obs.shared_ids = patients;
    obs.item_ids = std::move(raw.items);
    obs.datatype = raw.datatype;
    for (const auto& t : raw.triplets) {
      const auto it = patient_index.find(t.patient);
      if (it == patient_index.end()) {
        throw IngestionError(raw.path.string(), t.line, "unknown patient '" + t.patient + "'");
      }
      if (t.value != 0.0) obs.values.push_back({it->second, t.col, t.value});
    }
    std::sort(obs.values.begin(), obs.values.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    if (!out.emplace(raw.name, std::move(obs)).second) {
      throw IngestionError(manifest_path.string(), 0, "modality '" + raw.name + "' listed twice");
    }
  }
  return out;
}

void save_observations(const fs::path& dir, const ObservationSet& observations) {
  fs::create_directories(dir);
  json manifest;
  manifest["patients_path"] = "patients.txt";
  manifest["modalities"] = json::array();
  write_id_list(dir / "patients.txt", shared_ids_of(observations));
  for (const auto& [name, obs] : observations) {
    const std::string csv_name = name + ".csv";
    const std::string vocab_name = name + ".vocab.txt";
    write_id_list(dir / vocab_name, obs.item_ids);
    std::vector<Triplet> sorted = obs.values;
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::ofstream out(dir / csv_name, std::ios::binary);
    if (!out) throw IngestionError((dir / csv_name).string(), 0, "cannot write file");
    out << "patient_id,item_id,value\n";
    for (const auto& t : sorted) {
      out << csv::escape(obs.shared_ids[t.row]) << ',' << csv::escape(obs.item_ids[t.col]) << ','
          << format_double(t.value) << '\n';
    }
    manifest["modalities"].push_back(
        {{"name", name}, {"path", csv_name}, {"kind", to_string(obs.datatype)}, {"vocab_path", vocab_name}});
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

ObservationMatrix binarize(const ObservationMatrix& obs) {
  ObservationMatrix out = obs;
  out.datatype = DataType::Binary;
  out.values.clear();
  for (const auto& t : obs.values) {
    if (t.value > 0.0) out.values.push_back({t.row, t.col, 1.0});
  }
  return out;
}

std::vector<int> load_labels(const fs::path& path, const std::vector<std::string>& shared_ids) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open labels file");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < shared_ids.size(); ++i) index.emplace(shared_ids[i], i);
  std::vector<int> labels(shared_ids.size(), -1);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (lineno == 1 && fields[0] == "patient_id") continue;
    if (fields.size() != 2 || (fields[1] != "0" && fields[1] != "1")) {
      throw IngestionError(path.string(), lineno, "expected patient_id,label with label in {0,1}");
    }
    const auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw IngestionError(path.string(), lineno, "unknown patient '" + fields[0] + "'");
    }
    if (labels[it->second] != -1) {
      throw IngestionError(path.string(), lineno, "duplicate label for '" + fields[0] + "'");
    }
    labels[it->second] = fields[1] == "1" ? 1 : 0;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == -1) {
      throw IngestionError(path.string(), 0, "patient '" + shared_ids[i] + "' has no label");
    }
  }
  return labels;
}

void save_labels(const fs::path& path, const std::vector<std::string>& shared_ids,
                 const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError(path.string(), 0, "cannot write labels");
  out << "patient_id,label\n";
  for (std::size_t i = 0; i < shared_ids.size(); ++i) {
    out << csv::escape(shared_ids[i]) << ',' << labels.at(i) << '\n';
  }
}

const std::vector<std::string>& shared_ids_of(const ObservationSet& observations) {
  if (observations.empty()) throw ConfigError("empty observation set");
  return observations.begin()->second.shared_ids;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(
    std::size_t count, const std::vector<int>* labels, double ratio, std::uint64_t seed,
    bool stratified) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0, 1)");
  if (count < 2) throw std::invalid_argument("need at least 2 patients to split");
  if (labels && labels->size() != count) throw std::invalid_argument("label count mismatch");
  std::mt19937_64 rng(seed);

  std::vector<std::vector<std::size_t>> groups;
  if (stratified && labels) {
    groups.resize(2);
    for (std::size_t i = 0; i < count; ++i) groups[(*labels)[i] ? 1 : 0].push_back(i);
  } else {
    groups.emplace_back(count);
    for (std::size_t i = 0; i < count; ++i) groups[0][i] = i;
  }

  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(group.size())));
    if (groups.size() == 1) n_train = std::clamp<std::size_t>(n_train, 1, group.size() - 1);
    n_train = std::min(n_train, group.size());
    train.insert(train.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  if (train.empty() || test.empty()) throw std::invalid_argument("split produced an empty side");
  return {std::move(train), std::move(test)};
}

TrainTestSplit split_train_test(const ObservationSet& observations, const std::vector<int>* labels,
                                double ratio, std::uint64_t seed, bool stratified) {
  const std::size_t count = shared_ids_of(observations).size();
  auto [train_rows, test_rows] = split_rows(count, labels, ratio, seed, stratified);
  TrainTestSplit split;
  split.train = select_patients(observations, train_rows);
  split.test = select_patients(observations, test_rows);
  if (labels) {
    for (std::size_t r : train_rows) split.train_labels.push_back((*labels)[r]);
    for (std::size_t r : test_rows) split.test_labels.push_back((*labels)[r]);
  }
  split.train_rows = std::move(train_rows);
  split.test_rows = std::move(test_rows);
  return split;
}

}  // namespace chitf
