#include "chitf/analysis.hpp"

#include "chitf/csv.hpp"
#include "chitf/errors.hpp"
#include "chitf/format.hpp"
#include "chitf/regularizers.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace chitf {
namespace {

std::vector<std::size_t> ranked(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (idx.size() > k) idx.resize(k);
  return idx;
}

double pair_normalizer(std::size_t r, PairNormalization norm) {
  const double ordered = static_cast<double>(r) * static_cast<double>(r - 1);
  return norm == PairNormalization::Printed ? ordered : ordered / 2.0;
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace

std::vector<std::size_t> CorrespondenceRow::top(std::size_t k) const { return ranked(scores, k); }

std::vector<std::size_t> default_population(const ObservationMatrix& anchor_obs, std::size_t item) {
  std::vector<std::size_t> rows;
  for (const auto& t : anchor_obs.values) {
    if (t.col == item && t.value > 0.0) rows.push_back(t.row);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

CorrespondenceRow extract_correspondence(const FittedModel& model, const std::string& tensor_id,
                                         const std::string& anchor_modality, std::size_t anchor_item,
                                         const std::string& target_modality,
                                         std::span<const std::size_t> population) {
  const auto& tensor = model.spec().tensor(tensor_id);
  const auto has = [&](const std::string& m) {
    return std::find(tensor.modalities.begin(), tensor.modalities.end(), m) != tensor.modalities.end();
  };
  if (!has(anchor_modality) || !has(target_modality) || anchor_modality == target_modality) {
    throw ConfigError("tensor '" + tensor_id + "' does not relate '" + anchor_modality + "' and '" +
                      target_modality + "'");
  }
  const FactorMatrix& ua = model.factor(anchor_modality);
  const FactorMatrix& ub = model.factor(target_modality);
  const std::size_t a = model.modality_index(anchor_modality);
  if (anchor_item >= ua.rows()) throw ConfigError("anchor item index out of range");
  const std::string anchor_id = model.item_ids(a)[anchor_item];
  if (population.empty()) {
    throw ConfigError("empty base population for anchor " + anchor_modality + ":" + anchor_id);
  }

  RowVector w = RowVector::Zero(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t p : population) {
    if (p >= model.shared().rows()) throw ConfigError("population index out of range");
    w += model.shared().values().row(static_cast<Eigen::Index>(p));
  }
  for (const auto& m : tensor.modalities) {
    if (m != anchor_modality && m != target_modality) w = w.cwiseProduct(model.factor(m).column_sums());
  }

  CorrespondenceRow row;
  row.anchor_modality = anchor_modality;
  row.anchor_item = anchor_item;
  row.anchor_id = anchor_id;
  row.target_modality = target_modality;
  row.target_item_ids = model.item_ids(model.modality_index(target_modality));
  row.base_population_size = population.size();

  const RowVector left = ua.values().row(static_cast<Eigen::Index>(anchor_item)).cwiseProduct(w);
  const Vector raw = ub.values() * left.transpose();
  const double total = raw.sum();
  row.scores.assign(raw.data(), raw.data() + raw.size());
  if (total > 0.0) {
    for (double& s : row.scores) s /= total;
  } else {
    std::fill(row.scores.begin(), row.scores.end(), 0.0);
    row.all_zero = true;
  }
  return row;
}

std::vector<Phenotype> extract_phenotypes(const FittedModel& model, double threshold) {
  std::vector<Phenotype> out;
  for (std::size_t r = 0; r < model.rank(); ++r) {
    Phenotype ph;
    ph.index = r;
    ph.modalities = model.modalities();
    for (std::size_t n = 0; n < model.modalities().size(); ++n) {
      const auto col = model.factor(n).values().col(static_cast<Eigen::Index>(r));
      const double norm = col.sum();
      std::vector<PhenotypeItem> items;
      if (norm > 0.0) {
        for (Eigen::Index i = 0; i < col.size(); ++i) {
          const double weight = col(i) / norm;
          if (weight >= threshold && weight > 0.0) {
            items.push_back({static_cast<std::size_t>(i), model.item_ids(n)[static_cast<std::size_t>(i)], weight});
          }
        }
        std::stable_sort(items.begin(), items.end(),
                         [](const PhenotypeItem& x, const PhenotypeItem& y) { return x.weight > y.weight; });
      }
      ph.items.push_back(std::move(items));
    }
    out.push_back(std::move(ph));
  }
  return out;
}

double cosine_similarity_metric(std::span<const FactorMatrix> factors, PairNormalization norm) {
  if (factors.empty()) throw ConfigError("cosine similarity needs at least one factor");
  const std::size_t r = factors.front().rank();
  if (r < 2) throw ConfigError("cosine similarity needs rank >= 2");
  double sum = 0.0;
  for (const auto& f : factors) {
    if (f.rank() != r) throw ConfigError("factors disagree on rank");
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(r); ++a) {
      for (Eigen::Index b = a + 1; b < static_cast<Eigen::Index>(r); ++b) sum += column_cosine(f.values(), a, b);
    }
  }
  return sum / (static_cast<double>(factors.size()) * pair_normalizer(r, norm));
}

double jaccard_at_k(const std::vector<Phenotype>& phenotypes, std::size_t k, PairNormalization norm) {
  const std::size_t r = phenotypes.size();
  if (r < 2) throw ConfigError("jaccard@k needs at least two phenotypes");
  std::vector<std::set<std::pair<std::size_t, std::size_t>>> q(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t n = 0; n < phenotypes[i].items.size(); ++n) {
      const auto& items = phenotypes[i].items[n];
      for (std::size_t j = 0; j < std::min(k, items.size()); ++j) q[i].insert({n, items[j].index});
    }
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      std::size_t inter = 0;
      for (const auto& e : q[a]) inter += q[b].count(e);
      const std::size_t uni = q[a].size() + q[b].size() - inter;
      if (uni > 0) sum += static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return sum / pair_normalizer(r, norm);
}

double sparsity(std::span<const FactorMatrix> factors) {
  std::size_t positive = 0;
  std::size_t total = 0;
  for (const auto& f : factors) {
    positive += static_cast<std::size_t>((f.values().array() > 0.0).count());
    total += f.rows() * f.rank();
  }
  return total == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(total);
}

std::optional<double> meaningfulness_score(std::span<const double> scores, std::span<const int> annotations) {
  if (scores.size() != annotations.size()) throw ConfigError("scores and annotations differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (annotations[j] < 0 || annotations[j] > 2) throw ConfigError("annotation outside {0, 1, 2}");
    num += scores[j] * annotations[j];
    den += scores[j];
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

std::optional<double> meaningfulness_score(const CorrespondenceRow& row,
                                           const std::map<std::string, int>& annotations, std::size_t k) {
  std::vector<double> scores;
  std::vector<int> z;
  std::string missing;
  for (std::size_t j : row.top(k)) {
    const auto it = annotations.find(row.target_item_ids[j]);
    if (it == annotations.end()) {
      missing += (missing.empty() ? "" : ", ") + row.target_item_ids[j];
      continue;
    }
    scores.push_back(row.scores[j]);
    z.push_back(it->second);
  }
  if (!missing.empty()) {
    throw ConfigError("missing annotations for anchor " + row.anchor_id + ": " + missing);
  }
  return meaningfulness_score(scores, z);
}

Annotations load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string(), 0, "cannot open annotation file");
  Annotations out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 3) throw IngestionError(path.string(), lineno, "expected 3 fields");
    double v = 0.0;
    // Any first line whose score column is not a number is a header.
    if (lineno == 1 && !csv::parse_double(fields[2], v)) continue;
    if (!csv::parse_double(fields[2], v) || (v != 0.0 && v != 1.0 && v != 2.0)) {
      throw IngestionError(path.string(), lineno, "annotation score must be 0, 1 or 2");
    }
    auto& slot = out[fields[0]];
    if (slot.contains(fields[1])) throw IngestionError(path.string(), lineno, "duplicate annotation");
    slot[fields[1]] = static_cast<int>(v);
  }
  return out;
}

std::string correspondence_csv(const std::vector<CorrespondenceRow>& rows, std::size_t top_k) {
  std::ostringstream out;
  out << "anchor_modality,anchor_item,target_modality,target_item,score,rank\n";
  for (const auto& row : rows) {
    std::size_t rank = 1;
    for (std::size_t j : row.top(top_k)) {
      out << csv::escape(row.anchor_modality) << ',' << csv::escape(row.anchor_id) << ','
          << csv::escape(row.target_modality) << ',' << csv::escape(row.target_item_ids[j]) << ','
          << format_double(row.scores[j]) << ',' << rank++ << '\n';
    }
  }
  return out.str();
}

std::string phenotypes_json(const std::vector<Phenotype>& phenotypes) {
  std::ostringstream out;
  out << "[";
  for (std::size_t p = 0; p < phenotypes.size(); ++p) {
    const auto& ph = phenotypes[p];
    out << (p ? ",\n" : "\n") << "  {\"phenotype\": " << ph.index + 1 << ", \"modalities\": {";
    for (std::size_t n = 0; n < ph.modalities.size(); ++n) {
      out << (n ? ", " : "") << json_string(ph.modalities[n]) << ": [";
      for (std::size_t i = 0; i < ph.items[n].size(); ++i) {
        const auto& item = ph.items[n][i];
        out << (i ? ", " : "") << "{\"item\": " << json_string(item.id)
            << ", \"weight\": " << format_double(item.weight) << "}";
      }
      out << "]";
    }
    out << "}}";
  }
  out << "\n]\n";
  return out.str();
}

std::string phenotypes_table(const std::vector<Phenotype>& phenotypes, std::size_t per_modality) {
  std::ostringstream out;
  for (const auto& ph : phenotypes) {
    out << "Phenotype " << ph.index + 1 << '\n';
    for (std::size_t n = 0; n < ph.modalities.size(); ++n) {
      out << "  " << ph.modalities[n] << ": ";
      const auto& items = ph.items[n];
      for (std::size_t i = 0; i < std::min(per_modality, items.size()); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", items[i].weight);
        out << (i ? "; " : "") << items[i].id << " (" << buf << ")";
      }
      out << '\n';
    }
  }
  return out.str();
}

MetricsReport compute_metrics(const FittedModel& model, std::size_t k) {
  MetricsReport r;
  r.k = k;
  r.sparsity = sparsity(model.modality_factors());
  r.cosine_similarity = cosine_similarity_metric(model.modality_factors());
  r.jaccard_at_k = jaccard_at_k(extract_phenotypes(model), k);
  return r;
}

std::string metrics_json(const MetricsReport& report) {
  std::ostringstream out;
  out << "{\"sparsity\": " << format_double(report.sparsity)
      << ", \"cosine_similarity\": " << format_double(report.cosine_similarity)
      << ", \"jaccard_at_k\": " << format_double(report.jaccard_at_k) << ", \"k\": " << report.k << "}\n";
  return out.str();
}

}  // namespace chitf
