#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/explain/shapley.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/predict/tree.hpp"

namespace cgpa {

enum class ImportanceMethod { Permutation, TreeSurrogate };

struct ImportanceOptions {
  ImportanceMethod method = ImportanceMethod::Permutation;
  bool classification = false;  // permutation metric: error rate instead of MSE
  std::size_t n_repeats = 10;
  std::size_t surrogate_depth = 3;
  std::uint64_t seed = 0;
};

struct FeatureScore {
  std::string feature;
  double score = 0.0;
};

struct GlobalImportance {
  ImportanceMethod method = ImportanceMethod::Permutation;
  std::vector<FeatureScore> ranking;  // descending score, ties by name
  double surrogate_fidelity = 0.0;    // R^2 of the surrogate against the model (tree_surrogate only)
  double baseline_metric = 0.0;       // permutation only
  std::vector<double> scores;         // by feature index
};

namespace detail {

inline double loss_of(const Eigen::VectorXd& y, const Eigen::VectorXd& pred, bool classification) {
  if (classification) {
    std::size_t wrong = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) wrong += y(i) != pred(i);
    return static_cast<double>(wrong) / static_cast<double>(y.size());
  }
  return (y - pred).squaredNorm() / static_cast<double>(y.size());
}

inline Eigen::VectorXd apply_rows(const ModelFn& f, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = f(X.row(r).transpose());
  return out;
}

}  // namespace detail

/// Permutation importance (mean loss increase over shuffled copies of a column,
/// clamped at zero) or a depth-limited regression-tree surrogate fitted to the
/// model's outputs, scored by impurity decrease.
inline GlobalImportance global_importance(const ModelFn& f, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const std::vector<std::string>& names, const ImportanceOptions& opt = {}) {
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "empty dataset");
  if (static_cast<std::size_t>(X.cols()) != names.size()) fail(ErrorCode::DimensionMismatch, "name count differs from columns");
  GlobalImportance gi;
  gi.method = opt.method;
  const auto p = static_cast<std::size_t>(X.cols());
  gi.scores.assign(p, 0.0);
  const Eigen::VectorXd base_pred = detail::apply_rows(f, X);

  if (opt.method == ImportanceMethod::Permutation) {
    if (y.size() != X.rows()) fail(ErrorCode::DimensionMismatch, "y length differs from rows");
    gi.baseline_metric = detail::loss_of(y, base_pred, opt.classification);
    for (std::size_t j = 0; j < p; ++j) {
      double total = 0.0;
      for (std::size_t r = 0; r < opt.n_repeats; ++r) {
        Rng rng(split_seed(opt.seed, j * opt.n_repeats + r));
        const auto perm = rng.permutation(static_cast<std::size_t>(X.rows()));
        Eigen::MatrixXd Xp = X;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
          Xp(i, static_cast<Eigen::Index>(j)) = X(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), static_cast<Eigen::Index>(j));
        total += detail::loss_of(y, detail::apply_rows(f, Xp), opt.classification) - gi.baseline_metric;
      }
      gi.scores[j] = std::max(0.0, total / static_cast<double>(opt.n_repeats));
    }
  } else {
    TreeConfig cfg;
    cfg.max_depth = opt.surrogate_depth;
    const auto tree = fit_tree(X, base_pred, TreeTask::Regression, cfg);
    const Eigen::VectorXd imp = tree.impurity_importance();
    for (std::size_t j = 0; j < p; ++j) gi.scores[j] = imp(static_cast<Eigen::Index>(j));
    const Eigen::VectorXd sp = tree.predict(X);
    const double ss_tot = (base_pred.array() - base_pred.mean()).square().sum();
    const double ss_res = (base_pred - sp).squaredNorm();
    gi.surrogate_fidelity = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < p; ++j) gi.ranking.push_back({names[j], gi.scores[j]});
  std::sort(gi.ranking.begin(), gi.ranking.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feature < b.feature;
  });
  return gi;
}

inline nlohmann::json to_json(const GlobalImportance& g) {
  const char* method = g.method == ImportanceMethod::Permutation ? "permutation" : "tree_surrogate";
  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& r : g.ranking) ranking.push_back({{"feature", r.feature}, {"score", r.score}, {"method", method}});
  nlohmann::json j{{"method", method}, {"ranking", ranking}};
  if (g.method == ImportanceMethod::TreeSurrogate) j["surrogate_fidelity"] = g.surrogate_fidelity;
  else j["baseline_metric"] = g.baseline_metric;
  return j;
}

}  // namespace cgpa
