#include "chitf/cli/commands.hpp"

#include "chitf/analysis.hpp"
#include "chitf/data_io.hpp"
#include "chitf/errors.hpp"
#include "chitf/eval.hpp"
#include "chitf/format.hpp"
#include "chitf/model.hpp"
#include "chitf/persistence.hpp"
#include "chitf/solver.hpp"
#include "chitf/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

namespace chitf::cli {
namespace fs = std::filesystem;
namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << '\n';
    return kExitIngestion;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const OracleScaleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError(path.string(), 0, "cannot write");
  out << text;
}

std::size_t threads_from_env(std::size_t fallback) {
  const char* env = std::getenv("CHITF_THREADS");
  if (!env || !*env) return fallback;
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), value);
  if (ec != std::errc{} || *ptr != '\0' || value == 0) throw ConfigError("CHITF_THREADS must be a positive integer");
  return value;
}

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(':', start)) != std::string::npos; start = pos + 1) {
    parts.push_back(s.substr(start, pos - start));
  }
  parts.push_back(s.substr(start));
  return parts;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value == 0) {
    throw ConfigError(what + " must be a positive integer, got '" + s + "'");
  }
  return value;
}

// The first tensor that holds both modalities.
std::string pick_tensor(const ModelSpec& spec, const std::string& a, const std::string& b) {
  for (const auto& t : spec.tensors) {
    const auto has = [&](const std::string& m) {
      return std::find(t.modalities.begin(), t.modalities.end(), m) != t.modalities.end();
    };
    if (has(a) && has(b)) return t.id;
  }
  throw ConfigError("no tensor relates '" + a + "' and '" + b + "'");
}

struct Anchor {
  std::string modality;
  std::string item;  // "*" for all items
};

Anchor parse_anchor(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size()) {
    throw ConfigError("anchor must look like MODALITY:ITEM, got '" + s + "'");
  }
  return {s.substr(0, colon), s.substr(colon + 1)};
}

void check_model_items(const FittedModel& model, const ObservationSet& obs) {
  for (std::size_t n = 0; n < model.modalities().size(); ++n) {
    const auto it = obs.find(model.modalities()[n]);
    if (it == obs.end()) throw ConfigError("observations lack modality '" + model.modalities()[n] + "'");
    if (it->second.item_ids != model.item_ids(n)) {
      throw ConfigError("item vocabulary of '" + model.modalities()[n] + "' differs from the model");
    }
  }
  if (shared_ids_of(obs) != model.shared_ids()) {
    throw ConfigError("patients in the manifest differ from the model's training patients");
  }
}

CorrespondenceRow anchored_row(const FittedModel& model, const ObservationSet& obs, const std::string& tensor,
                               const std::string& anchor_modality, std::size_t item,
                               const std::string& target) {
  const auto pop = default_population(obs.at(anchor_modality), item);
  return extract_correspondence(model, tensor, anchor_modality, item, target, pop);
}

ModelSpec spec_from_modalities(const SynthArgs& args, std::map<std::string, std::size_t>& items,
                               std::map<std::string, DataType>& datatypes) {
  if (args.modalities.size() < 2) throw ConfigError("synth needs at least two --modality entries");
  ModelSpec spec;
  spec.rank = args.rank;
  spec.seed = args.seed;
  std::string anchor;
  std::size_t index = 0;
  for (const auto& token : args.modalities) {
    const auto parts = split_colon(token);
    if (parts.size() != 4) throw ConfigError("--modality must be NAME:SIZE:DATATYPE:DIST, got '" + token + "'");
    const std::string& name = parts[0];
    if (!valid_modality_name(name)) throw ConfigError("invalid modality name '" + name + "'");
    if (items.contains(name)) throw ConfigError("modality '" + name + "' given twice");
    items[name] = parse_count(parts[1], "modality size");
    datatypes[name] = parse_datatype(parts[2]);
    const Distribution dist = parse_distribution(parts[3]);
    if (index++ == 0) {
      anchor = name;
      continue;
    }
    InteractionTensorSpec t;
    t.id = anchor + "-" + name;
    t.modalities = {anchor, name};
    t.distribution = dist;
    t.sigma2 = args.sigma2;
    spec.tensors.push_back(std::move(t));
  }
  return spec;
}

}  // namespace

int cmd_synth(const SynthArgs& args) {
  return guarded([&] {
    if (args.out.empty()) throw ConfigError("--out is required");
    SynthConfig cfg;
    if (!args.spec.empty()) {
      cfg.spec = load_model_spec(args.spec);
      for (const auto& token : args.modalities) {
        const auto parts = split_colon(token);
        if (parts.size() < 3) throw ConfigError("--modality must be NAME:SIZE:DATATYPE[:DIST], got '" + token + "'");
        cfg.items[parts[0]] = parse_count(parts[1], "modality size");
        cfg.datatypes[parts[0]] = parse_datatype(parts[2]);
      }
      for (const auto& [name, type] : cfg.spec.datatypes) cfg.datatypes.try_emplace(name, type);
    } else {
      cfg.spec = spec_from_modalities(args, cfg.items, cfg.datatypes);
    }
    cfg.patients = args.patients;
    cfg.sparsity = args.sparsity;
    cfg.scale = args.scale;
    auto [obs, truth] = synth_generate(cfg, args.seed);

    const fs::path out = args.out;
    save_observations(out, obs);
    ModelSpec train_spec = truth.spec;
    for (auto& t : train_spec.tensors) {
      if (t.sigma2 <= 0.0) t.sigma2 = 1e-9;
    }
    write_text(out / "spec.json", model_spec_to_json(train_spec));
    save_truth(out / "truth", truth, obs);

    if (args.label_rate > 0.0) {
      if (args.label_rate >= 1.0) throw ConfigError("--label-rate must be in (0, 1)");
      if (args.label_column >= truth.shared.rank()) throw ConfigError("--label-column exceeds rank");
      const auto col = truth.shared.values().col(static_cast<Eigen::Index>(args.label_column));
      std::vector<std::size_t> order(cfg.patients);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return col(static_cast<Eigen::Index>(a)) > col(static_cast<Eigen::Index>(b));
      });
      const auto positives = static_cast<std::size_t>(std::llround(args.label_rate * static_cast<double>(cfg.patients)));
      std::vector<int> labels(cfg.patients, 0);
      for (std::size_t i = 0; i < positives; ++i) labels[order[i]] = 1;
      save_labels(out / "labels.csv", shared_ids_of(obs), labels);
    }
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args) {
  return guarded([&] {
    if (args.manifest.empty() || args.spec.empty() || args.out.empty()) {
      throw ConfigError("train needs --manifest, --spec and --out");
    }
    ModelSpec spec = load_model_spec(args.spec);
    if (args.seed) spec.seed = *args.seed;
    if (args.max_sweeps) spec.solver.max_sweeps = *args.max_sweeps;
    spec.solver.threads = threads_from_env(args.threads);
    spec.solver.deterministic = args.deterministic || spec.solver.threads <= 1;
    const ObservationSet obs = load_observations(args.manifest);

    FittedModel model = FittedModel::build(spec, obs);
    TraceCallback log;
    if (!args.quiet) {
      log = [](const TraceRecord& r) {
        if (r.sweep % 100 == 0) std::cerr << "sweep " << r.sweep << " objective " << r.objective << '\n';
      };
    }
    const TrainReport report = train(model, model.spec().solver, log);
    const fs::path out = args.out;
    save_model(out / "model", model);
    write_text(out / "trace.json", trace_to_json(report));
    if (!args.quiet) {
      std::cerr << (report.converged ? "converged" : "stopped at sweep budget") << " after "
                << report.sweeps_run << " sweeps, objective " << report.final_objective() << '\n';
    }
    return kExitOk;
  });
}

int cmd_correspondence(const CorrespondenceArgs& args) {
  return guarded([&] {
    if (args.model.empty() || args.manifest.empty() || args.out.empty() || args.target.empty() || args.anchors.empty()) {
      throw ConfigError("correspondence needs --model, --manifest, --anchor, --target and --out");
    }
    const FittedModel model = load_model(args.model);
    const ObservationSet obs = load_observations(args.manifest);
    check_model_items(model, obs);
    std::vector<CorrespondenceRow> rows;
    for (const auto& token : args.anchors) {
      const Anchor anchor = parse_anchor(token);
      const std::string tensor = args.tensor.empty() ? pick_tensor(model.spec(), anchor.modality, args.target) : args.tensor;
      const auto& anchor_obs = obs.at(anchor.modality);
      if (anchor.item == "*") {
        for (std::size_t j = 0; j < anchor_obs.cols(); ++j) {
          if (default_population(anchor_obs, j).empty()) continue;
          rows.push_back(anchored_row(model, obs, tensor, anchor.modality, j, args.target));
        }
      } else {
        std::size_t j = 0;
        try {
          j = anchor_obs.item_index(anchor.item);
        } catch (const std::out_of_range&) {
          throw ConfigError("unknown item '" + anchor.item + "' in modality '" + anchor.modality + "'");
        }
        rows.push_back(anchored_row(model, obs, tensor, anchor.modality, j, args.target));
      }
    }
    write_text(fs::path(args.out) / "reports" / "correspondence.csv", correspondence_csv(rows, args.top));
    return kExitOk;
  });
}

int cmd_phenotypes(const PhenotypesArgs& args) {
  return guarded([&] {
    if (args.model.empty() || args.out.empty()) throw ConfigError("phenotypes needs --model and --out");
    const FittedModel model = load_model(args.model);
    const auto phenotypes = extract_phenotypes(model, args.threshold);
    const fs::path reports = fs::path(args.out) / "reports";
    write_text(reports / "phenotypes.json", phenotypes_json(phenotypes));
    write_text(reports / "phenotypes.txt", phenotypes_table(phenotypes, args.per_modality));
    return kExitOk;
  });
}

int cmd_metrics(const MetricsArgs& args) {
  return guarded([&] {
    if (args.model.empty() || args.out.empty()) throw ConfigError("metrics needs --model and --out");
    const FittedModel model = load_model(args.model);
    const fs::path reports = fs::path(args.out) / "reports";
    write_text(reports / "metrics.json", metrics_json(compute_metrics(model, args.k)));
    if (args.annotations.empty()) return kExitOk;

    if (args.manifest.empty() || args.anchor_modality.empty() || args.target.empty()) {
      throw ConfigError("--annotations needs --manifest, --anchor-modality and --target");
    }
    const ObservationSet obs = load_observations(args.manifest);
    check_model_items(model, obs);
    const Annotations annotations = load_annotations(args.annotations);
    const std::string tensor = args.tensor.empty() ? pick_tensor(model.spec(), args.anchor_modality, args.target) : args.tensor;
    const auto& anchor_obs = obs.at(args.anchor_modality);
    std::string csv = "anchor_modality,anchor_item,meaningfulness\n";
    for (const auto& [anchor_id, labels] : annotations) {
      std::size_t j = 0;
      try {
        j = anchor_obs.item_index(anchor_id);
      } catch (const std::out_of_range&) {
        throw ConfigError("annotated anchor '" + anchor_id + "' is not an item of '" + args.anchor_modality + "'");
      }
      const auto row = anchored_row(model, obs, tensor, args.anchor_modality, j, args.target);
      const auto score = meaningfulness_score(row, labels, args.k);
      csv += args.anchor_modality + "," + anchor_id + "," + (score ? format_double(*score) : std::string{}) + "\n";
    }
    write_text(reports / "meaningfulness.csv", csv);
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args) {
  return guarded([&] {
    if (args.manifest.empty() || args.spec.empty() || args.labels.empty() || args.out.empty()) {
      throw ConfigError("evaluate needs --manifest, --spec, --labels and --out");
    }
    if (args.mode != "cv" && args.mode != "split") throw ConfigError("--mode must be cv or split");
    const ModelSpec spec = load_model_spec(args.spec);
    const ObservationSet obs = load_observations(args.manifest);
    const auto labels = load_labels(args.labels, shared_ids_of(obs));
    CvConfig cfg;
    cfg.folds = args.folds;
    cfg.seed = args.seed;
    cfg.threads = threads_from_env(args.threads);
    if (!args.lambdas.empty()) cfg.lambda_grid = args.lambdas;
    const CvReport report = args.mode == "cv" ? five_fold_cv(obs, labels, spec, cfg) : holdout_eval(obs, labels, spec, cfg);
    write_text(fs::path(args.out) / "reports" / "evaluation.json", cv_report_json(report));
    char line[64];
    std::snprintf(line, sizeof(line), "AUPRC %.3f (%.3f)\n", report.mean, report.std);
    std::cout << line;
    return kExitOk;
  });
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Collective hidden interaction tensor factorization"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic observations with planted factors");
  s->add_option("--out", synth.out, "Dataset directory")->required();
  s->add_option("--rank", synth.rank);
  s->add_option("--patients", synth.patients);
  s->add_option("--modality", synth.modalities, "NAME:SIZE:DATATYPE:DIST (first is the anchor)");
  s->add_option("--spec", synth.spec, "Generating model spec JSON");
  s->add_option("--sparsity", synth.sparsity);
  s->add_option("--scale", synth.scale);
  s->add_option("--sigma2", synth.sigma2);
  s->add_option("--seed", synth.seed);
  s->add_option("--label-rate", synth.label_rate, "Positive rate of labels.csv");
  s->add_option("--label-column", synth.label_column, "Planted shared column behind the labels");

  TrainArgs tr;
  std::size_t max_sweeps = 0;
  std::uint64_t seed = 0;
  auto* t = app.add_subcommand("train", "Fit a model");
  t->add_option("--manifest", tr.manifest)->required();
  t->add_option("--spec", tr.spec)->required();
  t->add_option("--out", tr.out)->required();
  auto* max_sweeps_opt = t->add_option("--max-sweeps", max_sweeps);
  auto* seed_opt = t->add_option("--seed", seed);
  t->add_option("--threads", tr.threads);
  t->add_flag("--deterministic", tr.deterministic);
  t->add_flag("--quiet", tr.quiet);

  CorrespondenceArgs co;
  auto* c = app.add_subcommand("correspondence", "Inferred correspondence for anchor items");
  c->add_option("--model", co.model)->required();
  c->add_option("--manifest", co.manifest)->required();
  c->add_option("--out", co.out)->required();
  c->add_option("--tensor", co.tensor);
  c->add_option("--anchor", co.anchors, "MODALITY:ITEM or MODALITY:*")->required();
  c->add_option("--target", co.target)->required();
  c->add_option("--top", co.top);

  PhenotypesArgs ph;
  auto* p = app.add_subcommand("phenotypes", "Phenotype definitions");
  p->add_option("--model", ph.model)->required();
  p->add_option("--out", ph.out)->required();
  p->add_option("--threshold", ph.threshold);
  p->add_option("--per-modality", ph.per_modality);

  MetricsArgs me;
  auto* m = app.add_subcommand("metrics", "Sparsity, cosine similarity and Jaccard@K");
  m->add_option("--model", me.model)->required();
  m->add_option("--out", me.out)->required();
  m->add_option("--k", me.k);
  m->add_option("--annotations", me.annotations);
  m->add_option("--manifest", me.manifest);
  m->add_option("--tensor", me.tensor);
  m->add_option("--anchor-modality", me.anchor_modality);
  m->add_option("--target", me.target);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Mortality-style prediction from patient representations");
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--spec", ev.spec)->required();
  e->add_option("--labels", ev.labels)->required();
  e->add_option("--out", ev.out)->required();
  e->add_option("--folds", ev.folds);
  e->add_option("--mode", ev.mode)->check(CLI::IsMember({"cv", "split"}));
  e->add_option("--seed", ev.seed);
  e->add_option("--threads", ev.threads);
  e->add_option("--lambda", ev.lambdas, "Lasso weights to select from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (s->parsed()) return cmd_synth(synth);
  if (t->parsed()) {
    if (*max_sweeps_opt) tr.max_sweeps = max_sweeps;
    if (*seed_opt) tr.seed = seed;
    return cmd_train(tr);
  }
  if (c->parsed()) return cmd_correspondence(co);
  if (p->parsed()) return cmd_phenotypes(ph);
  if (m->parsed()) return cmd_metrics(me);
  return cmd_evaluate(ev);
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"chitf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace chitf::cli
