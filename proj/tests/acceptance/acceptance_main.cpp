// Runs the ten acceptance criteria and prints one PASS/FAIL line each.
// `acceptance 3 7` runs only criteria 3 and 7. Exit status is non-zero when
// any selected criterion fails.

#include "chitf/analysis.hpp"
#include "chitf/cli/commands.hpp"
#include "chitf/data_io.hpp"
#include "chitf/eval.hpp"
#include "chitf/likelihoods.hpp"
#include "chitf/model.hpp"
#include "chitf/regularizers.hpp"
#include "chitf/solver.hpp"
#include "chitf/synth.hpp"
#include "chitf/tensor.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace chitf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Matrix sample_matrix(DataType type, std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> real(0.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = type == DataType::Integer ? count(rng) : type == DataType::Binary ? (coin(rng) ? 1.0 : 0.0) : real(rng);
  }
  return m;
}

ObservationMatrix dense_obs(const std::string& name, DataType type, const Matrix& m) {
  return from_dense(name, synthetic_ids("p", static_cast<std::size_t>(m.rows())),
                    synthetic_ids(name + "_", static_cast<std::size_t>(m.cols())), type, m);
}

// ---------------------------------------------------------------------------

Outcome marginalization_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> dim(1, 6), rank(1, 4), order(3, 4);
  double worst = 0.0;
  for (int config = 0; config < 50; ++config) {
    const std::size_t r = rank(rng), n_mod = order(rng) - 1;
    std::vector<FactorMatrix> all{oracle::random_factor(dim(rng), r, rng)};
    for (std::size_t k = 0; k < n_mod; ++k) all.push_back(oracle::random_factor(dim(rng), r, rng));
    const std::vector<FactorMatrix> mods(all.begin() + 1, all.end());
    const DenseTensor full = reconstruct_full(all);
    for (std::size_t t = 0; t < n_mod; ++t) {
      const Matrix dense = marginalize(full, {0, t + 1});
      const Matrix brute = oracle::marginal_by_enumeration(all[0], mods, t);
      const Matrix fast = reconstruct_marginal(all[0], mods, t);
      worst = std::max({worst, (fast - dense).cwiseAbs().maxCoeff(), (fast - brute).cwiseAbs().maxCoeff()});
    }
  }
  return {worst <= 1e-10, "50 configs, max abs diff " + fmt("%.2e", worst)};
}

Outcome gradient_suite() {
  std::mt19937_64 rng(202);
  double worst_nll = 0.0, worst_reg = 0.0, worst_model = 0.0;
  std::uniform_real_distribution<double> s2(0.3, 2.0), unit(0.05, 0.95);
  std::uniform_int_distribution<int> t_n(1, 6);

  const ObservationKind kinds[] = {{Distribution::Poisson, DataType::Integer},
                                   {Distribution::Poisson, DataType::Binary},
                                   {Distribution::Gaussian, DataType::Real},
                                   {Distribution::Gaussian, DataType::Binary}};
  for (const auto& kind : kinds) {
    for (int point = 0; point < 100; ++point) {
      std::optional<GaussianParams> params;
      if (kind.distribution == Distribution::Gaussian) params = GaussianParams{s2(rng), static_cast<double>(t_n(rng))};
      const Matrix v = sample_matrix(kind.datatype, 2, 3, rng);
      const Matrix vhat = oracle::random_matrix(2, 3, rng, 0.2, 3.0);
      const auto f = [&](const Matrix& x) { return nll(kind, v, x, params); };
      worst_nll = std::max(worst_nll, oracle::worst_gradient_error(f, vhat, grad_nll_wrt_reconstruction(kind, v, vhat, params)));
    }
  }
  for (int point = 0; point < 100; ++point) {
    const Matrix u = oracle::random_matrix(5, 3, rng, 0.05, 1.0);
    const double gamma = unit(rng), alpha = unit(rng), theta = unit(rng) * 0.9;
    const auto en = [&](const Matrix& x) { return elastic_net(x, gamma, alpha); };
    const auto ang = [&](const Matrix& x) { return angular_penalty(x, 1.0, theta); };
    worst_reg = std::max(worst_reg, oracle::worst_gradient_error(en, u, elastic_net_gradient(u, gamma, alpha)));
    worst_reg = std::max(worst_reg, oracle::worst_gradient_error(ang, u, angular_penalty_gradient(u, 1.0, theta)));
  }
  // Every block of a model holding all four observation kinds, one modality tied across tensors.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ModelSpec spec;
    spec.rank = 2;
    spec.seed = seed;
    spec.tensors.push_back({"pois", {"A", "B"}, Distribution::Poisson, 1e-9});
    spec.tensors.push_back({"gaus", {"C", "D", "B"}, Distribution::Gaussian, s2(rng)});
    ObservationSet obs;
    obs.emplace("A", dense_obs("A", DataType::Integer, sample_matrix(DataType::Integer, 4, 3, rng)));
    obs.emplace("B", dense_obs("B", DataType::Binary, sample_matrix(DataType::Binary, 4, 4, rng)));
    obs.emplace("C", dense_obs("C", DataType::Real, sample_matrix(DataType::Real, 4, 3, rng)));
    obs.emplace("D", dense_obs("D", DataType::Binary, sample_matrix(DataType::Binary, 4, 2, rng)));
    const FittedModel model = FittedModel::build(spec, obs);
    const ObjectiveParts base = model.objective_parts();
    for (std::size_t b = 0; b <= model.modalities().size(); ++b) {
      const BlockId block = b == 0 ? BlockId::shared() : BlockId::of_modality(b - 1);
      const auto f = [&](const Matrix& x) { return model.objective_parts_with(block, x, base).total(); };
      worst_model = std::max(worst_model, oracle::worst_gradient_error(f, model.block_values(block), model.gradient_block(block)));
    }
  }
  const double worst = std::max({worst_nll, worst_reg, worst_model});
  return {worst <= 1e-4, "worst relative error nll " + fmt("%.2e", worst_nll) + ", regularizers " +
                             fmt("%.2e", worst_reg) + ", model blocks " + fmt("%.2e", worst_model)};
}

Outcome quantization_laws() {
  constexpr int samples = 1000000;
  double worst_z = 0.0;
  // One stream per parameter point, so each point is an independent test.
  // Poisson-binary: hidden count ~ Poisson(vhat), observed indicator of count > 0.
  for (int k = 0; k < 20; ++k) {
    const double vhat = 0.05 + 0.15 * k;
    std::mt19937_64 rng(3000 + static_cast<std::uint64_t>(k));
    std::poisson_distribution<int> pois(vhat);
    int ones = 0;
    for (int s = 0; s < samples; ++s) ones += pois(rng) > 0;
    const double p = poisson_binary_probability(vhat);
    const double se = std::sqrt(p * (1.0 - p) / samples);
    worst_z = std::max(worst_z, std::abs(ones / double(samples) - p) / se);
  }
  // Gaussian-binary: hidden value ~ N(vhat, t sigma2), observed indicator of value > 0.
  for (int k = 0; k < 20; ++k) {
    const double vhat = -2.0 + 0.2 * k;
    const GaussianParams g{0.3 + 0.09 * k, static_cast<double>(1 + k % 4)};
    std::mt19937_64 rng(3100 + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal(vhat, std::sqrt(g.t_n * g.sigma2));
    int ones = 0;
    for (int s = 0; s < samples; ++s) ones += normal(rng) > 0.0;
    const double p = gaussian_binary_probability(vhat, g);
    const double se = std::sqrt(p * (1.0 - p) / samples);
    worst_z = std::max(worst_z, std::abs(ones / double(samples) - p) / se);
  }
  return {worst_z <= 3.0, "40 parameter points at 1e6 samples, worst |z| " + fmt("%.2f", worst_z)};
}

Outcome erf_accuracy() {
  double worst = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double x = i * 0.01;
    worst = std::max(worst, std::abs(erf_series(x) - oracle::erf_reference(x, 200)));
  }
  return {worst <= 1e-10, "801 grid points, max abs error " + fmt("%.2e", worst)};
}

Outcome solver_convergence() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelSpec spec;
    spec.rank = 5;
    spec.seed = seed;
    spec.tensors.push_back({"A-B", {"A", "B"}, Distribution::Poisson, 1e-9});
    spec.tensors.push_back({"A-C", {"A", "C"}, Distribution::Poisson, 1e-9});
    SynthConfig sc;
    sc.spec = spec;
    sc.patients = 500;
    sc.items = {{"A", 30}, {"B", 30}, {"C", 30}};
    sc.datatypes = {{"A", DataType::Integer}, {"B", DataType::Integer}, {"C", DataType::Integer}};
    const auto obs = synth_generate(sc, 1000 + seed).first;
    FittedModel model = FittedModel::build(spec, obs);
    SolverConfig cfg;
    cfg.max_sweeps = 5000;
    cfg.tol = 1e-6;
    const TrainReport report = train(model, cfg);
    bool monotone = true;
    for (std::size_t k = 1; k < report.loss_trace.size(); ++k) {
      monotone = monotone && report.loss_trace[k].objective <= report.loss_trace[k - 1].objective + 1e-12;
    }
    ok = ok && monotone && report.converged;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + ": " +
              (report.converged ? std::to_string(report.sweeps_run) + " sweeps" : "not converged") +
              (monotone ? "" : " NON-MONOTONE");
  }
  return {ok, detail};
}

Outcome planted_recovery() {
  constexpr int rank = 3, patients = 200, n_dx = 20, n_rx = 30;
  const auto dx_block = [](int j) { return j * rank / n_dx; };
  const auto rx_block = [](int j) { return j * rank / n_rx; };
  int correct = 0, anchors = 0;
  for (int seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::uniform_int_distribution<int> block(0, rank - 1);
    // Diagnosis block b corresponds to medication block b; each patient carries one or two blocks.
    Matrix s = Matrix::Zero(patients, rank), dx = Matrix::Zero(n_dx, rank), rx = Matrix::Zero(n_rx, rank);
    for (int i = 0; i < patients; ++i) {
      s(i, block(rng)) = u(rng);
      if (i % 3 == 0) s(i, block(rng)) += u(rng);
    }
    for (int j = 0; j < n_dx; ++j) dx(j, dx_block(j)) = u(rng);
    for (int j = 0; j < n_rx; ++j) rx(j, rx_block(j)) = u(rng);
    ModelSpec spec;
    spec.rank = rank;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.tensors.push_back({"Dx-Rx", {"Dx", "Rx"}, Distribution::Poisson, 1e-9});
    const SyntheticTruth truth{spec, {"Dx", "Rx"}, FactorMatrix(s), {FactorMatrix(dx), FactorMatrix(rx)},
                               static_cast<std::uint64_t>(seed)};
    const auto obs = sample_observations(truth, {{"Dx", DataType::Integer}, {"Rx", DataType::Integer}}, rng);
    FittedModel model = FittedModel::build(spec, obs);
    train(model, spec.solver);
    for (int j = 0; j < n_dx; ++j) {
      const auto pop = default_population(obs.at("Dx"), static_cast<std::size_t>(j));
      ++anchors;
      if (pop.empty()) continue;
      const auto row = extract_correspondence(model, "Dx-Rx", "Dx", static_cast<std::size_t>(j), "Rx", pop);
      correct += rx_block(static_cast<int>(row.top(1).front())) == dx_block(j);
    }
  }
  const double rate = static_cast<double>(correct) / anchors;
  return {rate >= 0.8, "top-1 block correct for " + std::to_string(correct) + "/" + std::to_string(anchors) +
                           " anchors (" + fmt("%.1f%%", 100.0 * rate) + ")"};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(707);
  double worst = 0.0;
  std::uniform_int_distribution<int> rank_d(2, 5), rows_d(2, 8), nmod_d(1, 3), level(0, 5), z(0, 2);
  std::bernoulli_distribution keep(0.6), coin(0.35);

  for (int trial = 0; trial < 100; ++trial) {
    const int r = rank_d(rng);
    std::vector<Matrix> raw;
    std::vector<FactorMatrix> fs;
    std::vector<std::string> names;
    ModelSpec spec;
    spec.rank = static_cast<std::size_t>(r);
    InteractionTensorSpec t{"t", {}, Distribution::Poisson, 1e-9};
    std::vector<std::vector<std::string>> ids;
    for (int n = nmod_d(rng); n > 0; --n) {
      Matrix m = oracle::random_matrix(static_cast<std::size_t>(rows_d(rng)), static_cast<std::size_t>(r), rng, 0.0, 1.0);
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (!keep(rng)) m.data()[i] = 0.0;
      }
      raw.push_back(m);
      fs.emplace_back(m);
      const std::string name = "M" + std::to_string(n);
      t.modalities.push_back(name);
      ids.push_back(synthetic_ids(name + "_", static_cast<std::size_t>(m.rows())));
      spec.datatypes[name] = DataType::Integer;
    }
    spec.tensors.push_back(t);
    worst = std::max(worst, std::abs(cosine_similarity_metric(fs) - oracle::cosine_metric(raw)));
    worst = std::max(worst, std::abs(sparsity(fs) - oracle::sparsity_count(raw)));

    // Jaccard@K against explicit top-K sets built from the raw columns.
    const std::size_t k = 3;
    const FittedModel model = FittedModel::from_factors(spec, FactorMatrix(Matrix::Ones(2, r)), fs,
                                                        synthetic_ids("p", 2), ids);
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> q(static_cast<std::size_t>(r));
    for (int c = 0; c < r; ++c) {
      for (std::size_t n = 0; n < raw.size(); ++n) {
        const auto& m = raw[n];
        std::vector<std::size_t> idx;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          if (m(i, c) > 0.0) idx.push_back(static_cast<std::size_t>(i));
        }
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
          return m(static_cast<Eigen::Index>(a), c) > m(static_cast<Eigen::Index>(b), c);
        });
        // Items below the phenotype threshold never enter Q.
        const double col_sum = m.col(c).sum();
        std::size_t taken = 0;
        for (std::size_t i : idx) {
          if (taken == k) break;
          if (m(static_cast<Eigen::Index>(i), c) / col_sum < 1e-4) continue;
          q[static_cast<std::size_t>(c)].insert({n, i});
          ++taken;
        }
      }
    }
    worst = std::max(worst, std::abs(jaccard_at_k(extract_phenotypes(model), k) - oracle::jaccard_metric(q)));

    std::vector<double> c(10);
    std::vector<int> ann(10);
    for (auto& x : c) x = oracle::random_matrix(1, 1, rng, 0.0, 1.0)(0, 0);
    for (auto& x : ann) x = z(rng);
    worst = std::max(worst, std::abs(*meaningfulness_score(c, ann) - oracle::meaningfulness(c, ann)));

    std::vector<double> scores(15);
    std::vector<int> labels(15);
    for (auto& x : scores) x = level(rng) * 0.2;
    for (auto& x : labels) x = coin(rng) ? 1 : 0;
    labels[0] = 1;
    labels[1] = 0;
    worst = std::max(worst, std::abs(auprc(scores, labels) - oracle::average_precision(scores, labels)));
  }
  const std::vector<FactorMatrix> identical{FactorMatrix(Matrix::Ones(3, 2))};
  const double fixed_point = cosine_similarity_metric(identical);
  return {worst <= 1e-12 && std::abs(fixed_point - 0.5) <= 1e-12,
          "100 instances per metric, max abs diff " + fmt("%.2e", worst) + "; N=1 R=2 identical columns -> " +
              fmt("%.2f", fixed_point)};
}

Outcome predictive_pipeline() {
  constexpr int rank = 3, patients = 200, n_dx = 20, n_rx = 30;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::uniform_int_distribution<int> block(0, rank - 1);
  Matrix s = Matrix::Zero(patients, rank), dx = Matrix::Zero(n_dx, rank), rx = Matrix::Zero(n_rx, rank);
  for (int i = 0; i < patients; ++i) {
    s(i, block(rng)) = u(rng);
    if (i % 3 == 0) s(i, block(rng)) += u(rng);
  }
  for (int j = 0; j < n_dx; ++j) dx(j, j * rank / n_dx) = u(rng);
  for (int j = 0; j < n_rx; ++j) rx(j, j * rank / n_rx) = u(rng);
  ModelSpec spec;
  spec.rank = rank;
  spec.seed = 3;
  spec.tensors.push_back({"Dx-Rx", {"Dx", "Rx"}, Distribution::Poisson, 1e-9});
  const SyntheticTruth truth{spec, {"Dx", "Rx"}, FactorMatrix(s), {FactorMatrix(dx), FactorMatrix(rx)}, 808};
  const auto obs = sample_observations(truth, {{"Dx", DataType::Integer}, {"Rx", DataType::Integer}}, rng);

  // Noiseless threshold: the 40 patients with the largest planted column 0 are positive.
  std::vector<std::size_t> order(patients);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s(static_cast<Eigen::Index>(a), 0) > s(static_cast<Eigen::Index>(b), 0);
  });
  std::vector<int> labels(patients, 0);
  for (int i = 0; i < patients / 5; ++i) labels[order[static_cast<std::size_t>(i)]] = 1;

  CvConfig cfg;
  cfg.seed = 5;
  const CvReport planted = five_fold_cv(obs, labels, spec, cfg);

  std::vector<int> shuffled = labels;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const CvReport control = five_fold_cv(obs, shuffled, spec, cfg);

  // Null spread of the fold-mean AUPRC: random scores on the control's fold structure.
  const auto folds = fold_partition(shuffled, cfg.folds, cfg.seed);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  std::vector<double> null_means;
  for (int rep = 0; rep < 2000; ++rep) {
    double sum = 0.0;
    for (std::size_t k = 0; k < cfg.folds; ++k) {
      std::vector<double> sc;
      std::vector<int> y;
      for (std::size_t i = 0; i < shuffled.size(); ++i) {
        if (folds[i] != k) continue;
        sc.push_back(noise(rng));
        y.push_back(shuffled[i]);
      }
      sum += auprc(sc, y);
    }
    null_means.push_back(sum / static_cast<double>(cfg.folds));
  }
  const double mu = std::accumulate(null_means.begin(), null_means.end(), 0.0) / null_means.size();
  double var = 0.0;
  for (double m : null_means) var += (m - mu) * (m - mu);
  const double sigma = std::sqrt(var / static_cast<double>(null_means.size() - 1));
  const double z = std::abs(control.mean - 0.2) / sigma;

  return {planted.mean >= 0.95 && z <= 3.0, "planted mean AUPRC " + fmt("%.3f", planted.mean) + fmt(" (%.3f)", planted.std) +
                                                 ", shuffled " + fmt("%.3f", control.mean) + " vs base rate 0.2, sigma " +
                                                 fmt("%.3f", sigma) + fmt(", |z| %.2f", z)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "chitf_acceptance_determinism";
  fs::remove_all(dir);
  const std::string data = (dir / "data").string();
  int rc = cli::run({"synth", "--out", data, "--rank", "4", "--patients", "300", "--modality", "Dx:20:binary:poisson",
                     "--modality", "Rx:30:integer:poisson", "--modality", "Lab:15:integer:poisson", "--seed", "9"});
  for (const char* out : {"run1", "run2"}) {
    if (rc != 0) break;
    rc = cli::run({"train", "--manifest", data + "/manifest.json", "--spec", data + "/spec.json", "--out",
                   (dir / out).string(), "--seed", "9", "--threads", "1", "--deterministic", "--quiet"});
  }
  if (rc != 0) {
    fs::remove_all(dir);
    return {false, "command failed with exit code " + std::to_string(rc)};
  }
  const auto a = snapshot(dir / "run1");
  const auto b = snapshot(dir / "run2");
  fs::remove_all(dir);
  return {a == b && !a.empty(), std::to_string(a.size()) + " files compared, " + (a == b ? "identical" : "DIFFERENT")};
}

Outcome regularizer_ablation() {
  double cos_off = 0.0, cos_on = 0.0, sp_off = 0.0, sp_on = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelSpec spec;
    spec.rank = 5;
    spec.seed = seed;
    spec.tensors.push_back({"Dx-Rx", {"Dx", "Rx"}, Distribution::Poisson, 1e-9});
    spec.tensors.push_back({"Dx-Lab", {"Dx", "Lab"}, Distribution::Poisson, 1e-9});
    SynthConfig sc;
    sc.spec = spec;
    sc.patients = 200;
    sc.items = {{"Dx", 20}, {"Rx", 30}, {"Lab", 15}};
    sc.datatypes = {{"Dx", DataType::Binary}, {"Rx", DataType::Integer}, {"Lab", DataType::Integer}};
    const auto obs = synth_generate(sc, 100 + seed).first;
    const auto fit = [&](double beta, double gamma) {
      ModelSpec s = spec;
      s.regularizer.beta = beta;
      s.regularizer.theta = 0.5;
      s.regularizer.gamma = gamma;
      s.regularizer.alpha = 0.7;
      FittedModel m = FittedModel::build(s, obs);
      train(m, s.solver);
      return std::pair{cosine_similarity_metric(m.modality_factors()), sparsity(m.modality_factors())};
    };
    // Each comparison switches one regularizer with the other held off.
    cos_off += fit(0.0, 0.0).first / 5;
    cos_on += fit(1.0, 0.0).first / 5;
    sp_off += fit(0.0, 0.0).second / 5;
    sp_on += fit(0.0, 1e-5).second / 5;
  }
  return {cos_on < cos_off && sp_on <= sp_off,
          "mean cosine " + fmt("%.6f", cos_off) + " -> " + fmt("%.6f", cos_on) + " with angular, mean sparsity " +
              fmt("%.4f", sp_off) + " -> " + fmt("%.4f", sp_on) + " with elastic net"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "marginalization oracle", 10, marginalization_oracle},
      {2, "gradient suite", 60, gradient_suite},
      {3, "quantization laws", 120, quantization_laws},
      {4, "erf accuracy", 5, erf_accuracy},
      {5, "solver monotonicity and convergence", 300, solver_convergence},
      {6, "planted correspondence recovery", 180, planted_recovery},
      {7, "metric oracles", 10, metric_oracles},
      {8, "predictive pipeline", 600, predictive_pipeline},
      {9, "determinism", 120, determinism},
      {10, "regularizer ablation direction", 600, regularizer_ablation},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %2d %s: %s (%s; %.1f s of %.0f s budget%s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
