#pragma once

// Subcommands of the `chitf` binary. Each returns a process exit code:
// 0 success, 2 usage/configuration, 3 ingestion, 4 numeric failure.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chitf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIngestion = 3;
inline constexpr int kExitNumeric = 4;

struct SynthArgs {
  std::string out;
  std::size_t rank = 3;
  std::size_t patients = 200;
  std::vector<std::string> modalities;  // NAME:SIZE:DATATYPE:DIST, first is the anchor
  std::string spec;                     // optional generating spec (overrides pairing)
  double sparsity = 0.5;
  double scale = 1.0;
  double sigma2 = 1e-9;
  std::uint64_t seed = 0;
  double label_rate = 0.0;  // > 0 writes labels.csv from a planted shared column
  std::size_t label_column = 0;
};

struct TrainArgs {
  std::string manifest;
  std::string spec;
  std::string out;
  std::optional<std::size_t> max_sweeps;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool deterministic = false;
  bool quiet = false;
};

struct CorrespondenceArgs {
  std::string model;
  std::string manifest;
  std::string out;
  std::string tensor;                // default: first tensor holding both modalities
  std::vector<std::string> anchors;  // MODALITY:ITEM, or MODALITY:* for every item
  std::string target;
  std::size_t top = 10;
};

struct PhenotypesArgs {
  std::string model;
  std::string out;
  double threshold = 1e-4;
  std::size_t per_modality = 10;
};

struct MetricsArgs {
  std::string model;
  std::string out;
  std::size_t k = 10;
  std::string annotations;  // optional: anchor_item,target_item,score
  std::string manifest;     // required with annotations
  std::string tensor;
  std::string anchor_modality;
  std::string target;
};

struct EvaluateArgs {
  std::string manifest;
  std::string spec;
  std::string labels;
  std::string out;
  std::size_t folds = 5;
  std::string mode = "cv";  // cv | split
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<double> lambdas;
};

int cmd_synth(const SynthArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_correspondence(const CorrespondenceArgs& args);
int cmd_phenotypes(const PhenotypesArgs& args);
int cmd_metrics(const MetricsArgs& args);
int cmd_evaluate(const EvaluateArgs& args);

/// Parse argv and dispatch. Errors are reported on stderr.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace chitf::cli
