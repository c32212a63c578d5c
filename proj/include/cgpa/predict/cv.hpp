#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/parallel.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/predict/model.hpp"

namespace cgpa {

/// Shuffled k-fold partition: fold f holds positions [f n / k, (f + 1) n / k)
/// of a seeded permutation. Each returned vector is a sorted test index set.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < k) fail(ErrorCode::TooFewRows, std::to_string(n) + " rows cannot form " + std::to_string(k) + " folds");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t i = f * n / k; i < (f + 1) * n / k; ++i) folds[f].push_back(perm[i]);
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

struct FoldResult {
  std::vector<std::size_t> test_indices;
  std::optional<RegressionMetrics> regression;
  std::optional<ClassificationMetrics> classification;
  double score = 0.0;  // R^2 for regression, accuracy for classification
};

struct CvResult {
  std::string score_name;
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over folds
};

namespace detail {

inline Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

inline Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace detail

/// k-fold cross-validation. Columns listed in `zscore_columns` are expected
/// unscaled in X; each fold z-scores them with statistics of its training part.
/// Folds run concurrently when jobs > 1 and are merged by fold index.
inline CvResult cross_validate(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k,
                               std::uint64_t seed, const std::vector<std::size_t>& zscore_columns = {},
                               std::size_t jobs = 1, std::size_t n_classes = 0) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (static_cast<std::size_t>(y.size()) != n) fail(ErrorCode::DimensionMismatch, "X and y row counts differ");
  const auto folds = kfold_partition(n, k, seed);
  const bool cls = spec.is_classifier();
  if (!cls && n / k < 2) fail(ErrorCode::TooFewRows, "regression folds need at least two test rows");
  if (cls && n_classes == 0) n_classes = detail::class_count(y);

  CvResult res;
  res.score_name = cls ? "accuracy" : "r2";
  res.folds.resize(k);
  parallel_for(k, jobs, [&](std::size_t f) {
    std::vector<char> in_test(n, 0);
    for (auto i : folds[f]) in_test[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_test[i]) train.push_back(i);
    Eigen::MatrixXd Xtr = detail::rows_of(X, train);
    Eigen::MatrixXd Xte = detail::rows_of(X, folds[f]);
    for (auto c : zscore_columns) {
      const auto s = NumericDataset::fit_zscore(Xtr.col(static_cast<Eigen::Index>(c)));
      for (auto* M : {&Xtr, &Xte})
        M->col(static_cast<Eigen::Index>(c)) = M->col(static_cast<Eigen::Index>(c)).unaryExpr([&](double v) { return s.apply(v); });
    }
    const Eigen::VectorXd ytr = detail::rows_of(y, train);
    const Eigen::VectorXd yte = detail::rows_of(y, folds[f]);
    ModelSpec fold_spec = spec;
    fold_spec.seed = split_seed(spec.seed, f);
    const auto model = fit_model(fold_spec, Xtr, ytr, n_classes);
    const Eigen::VectorXd pred = predict(model, Xte);
    FoldResult fr;
    fr.test_indices = folds[f];
    if (cls) {
      fr.classification = classification_metrics(yte, pred, n_classes);
      fr.score = fr.classification->accuracy;
    } else {
      fr.regression = regression_metrics(yte, pred);
      fr.score = fr.regression->r2;
    }
    res.folds[f] = std::move(fr);
  });
  double s = 0.0;
  for (const auto& f : res.folds) s += f.score;
  res.mean = s / static_cast<double>(k);
  double v = 0.0;
  for (const auto& f : res.folds) v += (f.score - res.mean) * (f.score - res.mean);
  res.sd = std::sqrt(v / static_cast<double>(k - 1));
  return res;
}

inline nlohmann::json to_json(const CvResult& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json jf{{"score", f.score}, {"test_size", f.test_indices.size()}};
    if (f.regression) jf["regression"] = to_json(*f.regression);
    if (f.classification) jf["classification"] = to_json(*f.classification);
    folds.push_back(jf);
  }
  return {{"score_name", r.score_name}, {"mean", r.mean}, {"sd", r.sd}, {"folds", folds}};
}

}  // namespace cgpa
