#pragma once

// Downstream prediction: lasso-logistic regression on patient representations,
// scored by average precision, under k-fold cross validation or a holdout split.

#include "chitf/model_spec.hpp"
#include "chitf/observations.hpp"
#include "chitf/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chitf {

struct LogisticConfig {
  std::size_t max_iter = 10000;
  double tol = 1e-7;  // relative objective change
};

struct LogisticModel {
  Vector weights;
  double intercept = 0.0;
  std::vector<double> objective_trace;
  std::size_t iterations = 0;

  Vector decision(const Matrix& features) const;
};

/// Minimizes mean logistic loss + lambda ||w||_1 (intercept unpenalized) by
/// proximal gradient with backtracking. Throws ConfigError on single-class
/// labels or mismatched shapes.
LogisticModel lasso_logistic_fit(const Matrix& features, const std::vector<int>& labels, double lambda,
                                 const LogisticConfig& cfg = {});

/// Average precision with tied scores grouped: sum over score groups of
/// (positives in group / P) * precision after the group.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Fold id per patient, each class dealt round-robin after a seeded shuffle.
std::vector<std::size_t> fold_partition(const std::vector<int>& labels, std::size_t folds,
                                        std::uint64_t seed);

struct CvConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  double inner_ratio = 0.8;
  double holdout_ratio = 0.8;
  LogisticConfig logistic;
  std::size_t threads = 1;
};

struct FoldResult {
  double auprc = 0.0;
  double lambda = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct CvReport {
  std::string mode;  // "cv" or "split"
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  CvConfig config;
};

/// Lambda maximizing AUPRC on a stratified inner split of the training rows.
double select_lambda(const Matrix& features, const std::vector<int>& labels, const CvConfig& cfg);

/// Train on `train_rows`, project `test_rows`, fit and score the classifier.
FoldResult evaluate_fold(const ObservationSet& obs, const std::vector<int>& labels,
                         const std::vector<std::size_t>& train_rows,
                         const std::vector<std::size_t>& test_rows, const ModelSpec& spec,
                         const CvConfig& cfg);

CvReport five_fold_cv(const ObservationSet& obs, const std::vector<int>& labels, const ModelSpec& spec,
                      const CvConfig& cfg = {});
CvReport holdout_eval(const ObservationSet& obs, const std::vector<int>& labels, const ModelSpec& spec,
                      const CvConfig& cfg = {});

std::string cv_report_json(const CvReport& report);

}  // namespace chitf
