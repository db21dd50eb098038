#include "chitf/eval.hpp"

#include "chitf/data_io.hpp"
#include "chitf/errors.hpp"
#include "chitf/format.hpp"
#include "chitf/model.hpp"
#include "chitf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace chitf {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_labels(const std::vector<int>& labels) {
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
    (y ? pos : neg) = true;
  }
  if (!pos || !neg) throw ConfigError("labels contain a single class");
}

double smooth_loss(const Matrix& x, const Vector& y, const Vector& w, double b) {
  const Vector z = (x * w).array() + b;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += softplus(z(i)) - y(i) * z(i);
  return sum / static_cast<double>(z.size());
}

Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

void summarize(CvReport& report) {
  double sum = 0.0;
  for (const auto& f : report.folds) sum += f.auprc;
  report.mean = sum / static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const auto& f : report.folds) var += (f.auprc - report.mean) * (f.auprc - report.mean);
  report.std = std::sqrt(var / static_cast<double>(report.folds.size()));
}

}  // namespace

Vector LogisticModel::decision(const Matrix& features) const {
  return (features * weights).array() + intercept;
}

LogisticModel lasso_logistic_fit(const Matrix& features, const std::vector<int>& labels, double lambda,
                                 const LogisticConfig& cfg) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ConfigError("feature rows and labels differ in count");
  }
  if (labels.size() < 2) throw ConfigError("logistic fit needs at least 2 patients");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  check_labels(labels);

  const auto n = static_cast<double>(labels.size());
  Vector y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];

  LogisticModel m;
  m.weights = Vector::Zero(features.cols());
  m.intercept = 0.0;
  double f = smooth_loss(features, y, m.weights, m.intercept);
  double obj = f;
  m.objective_trace.push_back(obj);
  double t = 1.0;

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const Vector z = (features * m.weights).array() + m.intercept;
    Vector resid(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) resid(i) = sigmoid(z(i)) - y(i);
    const Vector gw = features.transpose() * resid / n;
    const double gb = resid.sum() / n;

    Vector w_new;
    double b_new = 0.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      const Vector step = m.weights - t * gw;
      w_new = step.unaryExpr([&](double v) {
        const double s = std::abs(v) - t * lambda;
        return s > 0.0 ? std::copysign(s, v) : 0.0;
      });
      b_new = m.intercept - t * gb;
      const Vector dw = w_new - m.weights;
      const double db = b_new - m.intercept;
      f_new = smooth_loss(features, y, w_new, b_new);
      const double model_bound = f + gw.dot(dw) + gb * db + (dw.squaredNorm() + db * db) / (2.0 * t);
      if (f_new <= model_bound) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const double obj_new = f_new + lambda * w_new.lpNorm<1>();
    // A step that fails to improve means the iterate is stationary at this precision.
    if (obj_new > obj) break;
    const double change = std::abs(obj - obj_new) / std::max(1.0, std::abs(obj));
    m.weights = std::move(w_new);
    m.intercept = b_new;
    f = f_new;
    obj = obj_new;
    m.objective_trace.push_back(obj);
    m.iterations = it + 1;
    if (change < cfg.tol) break;
    t *= 2.0;
  }
  return m;
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels differ in length");
  check_labels(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double ap = 0.0;
  std::size_t seen = 0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) group_tp += labels[order[j++]] == 1;
    seen += j - i;
    tp += group_tp;
    if (group_tp > 0) ap += (static_cast<double>(group_tp) / positives) * (static_cast<double>(tp) / static_cast<double>(seen));
    i = j;
  }
  return ap;
}

std::vector<std::size_t> fold_partition(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least 2 folds");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = k % folds;
  }
  return fold;
}

double select_lambda(const Matrix& features, const std::vector<int>& labels, const CvConfig& cfg) {
  if (cfg.lambda_grid.empty()) throw ConfigError("empty lambda grid");
  auto [inner_train, inner_val] =
      split_rows(labels.size(), &labels, cfg.inner_ratio, cfg.seed ^ 0x9e3779b97f4a7c15ULL, true);
  const auto y_train = pick(labels, inner_train);
  const auto y_val = pick(labels, inner_val);
  const auto has_both = [](const std::vector<int>& y) {
    return std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
  };
  // Too few patients of a class to validate: fall back to the middle of the grid.
  if (!has_both(y_train) || !has_both(y_val)) return cfg.lambda_grid[cfg.lambda_grid.size() / 2];
  const Matrix x_train = rows_of(features, inner_train);
  const Matrix x_val = rows_of(features, inner_val);
  double best = cfg.lambda_grid.front();
  double best_score = -1.0;
  for (double lambda : cfg.lambda_grid) {
    const auto model = lasso_logistic_fit(x_train, y_train, lambda, cfg.logistic);
    const Vector s = model.decision(x_val);
    const double score = auprc(std::vector<double>(s.data(), s.data() + s.size()), y_val);
    if (score > best_score) {
      best_score = score;
      best = lambda;
    }
  }
  return best;
}

FoldResult evaluate_fold(const ObservationSet& obs, const std::vector<int>& labels,
                         const std::vector<std::size_t>& train_rows,
                         const std::vector<std::size_t>& test_rows, const ModelSpec& spec,
                         const CvConfig& cfg) {
  const auto y_train = pick(labels, train_rows);
  const auto y_test = pick(labels, test_rows);
  FittedModel model = FittedModel::build(spec, select_patients(obs, train_rows));
  SolverConfig solver = spec.solver;
  solver.threads = std::max<std::size_t>(solver.threads, cfg.threads);
  model.set_threads(solver.effective_threads());
  train(model, solver);
  const FactorMatrix test_repr = project_patients(model, select_patients(obs, test_rows), solver);

  FoldResult r;
  r.n_train = train_rows.size();
  r.n_test = test_rows.size();
  r.lambda = select_lambda(model.shared().values(), y_train, cfg);
  const auto clf = lasso_logistic_fit(model.shared().values(), y_train, r.lambda, cfg.logistic);
  const Vector s = clf.decision(test_repr.values());
  r.auprc = auprc(std::vector<double>(s.data(), s.data() + s.size()), y_test);
  return r;
}

CvReport five_fold_cv(const ObservationSet& obs, const std::vector<int>& labels, const ModelSpec& spec,
                      const CvConfig& cfg) {
  if (labels.size() != shared_ids_of(obs).size()) throw ConfigError("labels do not cover every patient");
  check_labels(labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives < cfg.folds || labels.size() - positives < cfg.folds) {
    throw ConfigError("need at least " + std::to_string(cfg.folds) + " patients per class");
  }
  const auto fold = fold_partition(labels, cfg.folds, cfg.seed);
  CvReport report;
  report.mode = "cv";
  report.config = cfg;
  for (std::size_t k = 0; k < cfg.folds; ++k) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == k ? test_rows : train_rows).push_back(i);
    report.folds.push_back(evaluate_fold(obs, labels, train_rows, test_rows, spec, cfg));
  }
  summarize(report);
  return report;
}

CvReport holdout_eval(const ObservationSet& obs, const std::vector<int>& labels, const ModelSpec& spec,
                      const CvConfig& cfg) {
  if (labels.size() != shared_ids_of(obs).size()) throw ConfigError("labels do not cover every patient");
  check_labels(labels);
  auto [train_rows, test_rows] = split_rows(labels.size(), &labels, cfg.holdout_ratio, cfg.seed, true);
  CvReport report;
  report.mode = "split";
  report.config = cfg;
  report.folds.push_back(evaluate_fold(obs, labels, train_rows, test_rows, spec, cfg));
  summarize(report);
  return report;
}

std::string cv_report_json(const CvReport& report) {
  std::ostringstream out;
  out << "{\n  \"folds\": [";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    out << (i ? ",\n" : "\n") << "    {\"auprc\": " << format_double(f.auprc)
        << ", \"lambda\": " << format_double(f.lambda) << ", \"n_train\": " << f.n_train
        << ", \"n_test\": " << f.n_test << "}";
  }
  char summary[64];
  std::snprintf(summary, sizeof(summary), "%.3f (%.3f)", report.mean, report.std);
  out << "\n  ],\n  \"mean\": " << format_double(report.mean) << ",\n  \"std\": " << format_double(report.std)
      << ",\n  \"summary\": \"" << summary << "\",\n  \"config\": {\"mode\": \"" << report.mode
      << "\", \"folds\": " << report.config.folds << ", \"seed\": " << report.config.seed
      << ", \"lambda_grid\": [";
  for (std::size_t i = 0; i < report.config.lambda_grid.size(); ++i) {
    out << (i ? ", " : "") << format_double(report.config.lambda_grid[i]);
  }
  out << "], \"inner_ratio\": " << format_double(report.config.inner_ratio)
      << ", \"holdout_ratio\": " << format_double(report.config.holdout_ratio)
      << ", \"classifier\": \"lasso logistic, proximal gradient\", \"features\": \"raw shared factor rows\""
      << ", \"auprc\": \"average precision, tied scores grouped\", \"std\": \"population (ddof 0)\"}\n}\n";
  return out.str();
}

}  // namespace chitf
