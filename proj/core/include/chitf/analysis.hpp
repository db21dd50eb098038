#pragma once

// Reading a fitted model: inferred correspondence between items of two
// modalities, phenotype definitions, and the diversity/sparsity metrics.

#include "chitf/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chitf {

struct CorrespondenceRow {
  std::string anchor_modality;
  std::size_t anchor_item = 0;
  std::string anchor_id;
  std::string target_modality;
  std::vector<std::string> target_item_ids;
  std::vector<double> scores;  // l1-normalized, aligned with target_item_ids
  std::size_t base_population_size = 0;
  bool all_zero = false;

  /// Indices of the k highest scores, ties by index ascending.
  std::vector<std::size_t> top(std::size_t k) const;
};

/// Patients whose observed anchor-modality row has `item` present.
std::vector<std::size_t> default_population(const ObservationMatrix& anchor_obs, std::size_t item);

/// Row `anchor_item` of U_A diag(sum_{p in pop} u_s(p,:) * other scales) U_B^T,
/// l1-normalized. Throws ConfigError on an empty population or when the tensor
/// does not contain both modalities.
CorrespondenceRow extract_correspondence(const FittedModel& model, const std::string& tensor_id,
                                         const std::string& anchor_modality, std::size_t anchor_item,
                                         const std::string& target_modality,
                                         std::span<const std::size_t> population);

struct PhenotypeItem {
  std::size_t index = 0;
  std::string id;
  double weight = 0.0;
};

struct Phenotype {
  std::size_t index = 0;
  std::vector<std::string> modalities;
  std::vector<std::vector<PhenotypeItem>> items;  // per modality, weight descending
};

/// Column r of every modality factor, l1-normalized; entries below `threshold`
/// dropped. Ties are ordered by item index.
std::vector<Phenotype> extract_phenotypes(const FittedModel& model, double threshold = 1e-4);

// Both diversity metrics sum over r2 > r1. Printed divides by R(R-1) as in the
// published formulas; UnorderedPairs divides by R(R-1)/2.
enum class PairNormalization { Printed, UnorderedPairs };

double cosine_similarity_metric(std::span<const FactorMatrix> factors,
                                PairNormalization norm = PairNormalization::Printed);

/// Q_r(K) is the union over modalities of the top-K items of phenotype r.
double jaccard_at_k(const std::vector<Phenotype>& phenotypes, std::size_t k = 10,
                    PairNormalization norm = PairNormalization::Printed);

/// Fraction of entries > 0 across all given factors.
double sparsity(std::span<const FactorMatrix> factors);

/// sum c_j z_j / sum c_j. nullopt when every weight is zero.
std::optional<double> meaningfulness_score(std::span<const double> scores,
                                           std::span<const int> annotations);

/// Top `k` of the row, annotated by target item id. Throws ConfigError listing
/// the items without an annotation.
std::optional<double> meaningfulness_score(const CorrespondenceRow& row,
                                           const std::map<std::string, int>& annotations,
                                           std::size_t k = 10);

/// anchor item id -> target item id -> score in {0, 1, 2}.
using Annotations = std::map<std::string, std::map<std::string, int>>;
Annotations load_annotations(const std::filesystem::path& path);

// Reports.
std::string correspondence_csv(const std::vector<CorrespondenceRow>& rows, std::size_t top_k);
std::string phenotypes_json(const std::vector<Phenotype>& phenotypes);
/// "Phenotype 1\n  Dx: a (0.626); b (0.2)\n ..." one block per phenotype.
std::string phenotypes_table(const std::vector<Phenotype>& phenotypes, std::size_t per_modality = 10);

struct MetricsReport {
  double sparsity = 0.0;
  double cosine_similarity = 0.0;
  double jaccard_at_k = 0.0;
  std::size_t k = 10;
};
MetricsReport compute_metrics(const FittedModel& model, std::size_t k = 10);
std::string metrics_json(const MetricsReport& report);

}  // namespace chitf
