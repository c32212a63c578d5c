#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/parallel.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/predict/tree.hpp"

namespace cgpa {

enum class FeatureSubsetRule { Auto, All };

struct ForestConfig {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  FeatureSubsetRule feature_subset = FeatureSubsetRule::Auto;  // Auto: ceil(sqrt p) or ceil(p/3)
  TreeConfig tree;
  std::size_t jobs = 1;
};

struct ForestModel {
  TreeTask task = TreeTask::Regression;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  FeatureSubsetRule feature_subset = FeatureSubsetRule::Auto;
  bool bootstrap = true;

  /// Mean of tree outputs, or the majority class with ties to the lowest label.
  double predict_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (task == TreeTask::Regression) {
      double s = 0.0;
      for (const auto& t : trees) s += t.predict_one(x);
      return s / static_cast<double>(trees.size());
    }
    std::vector<std::size_t> votes(n_classes, 0);
    for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict_one(x))];
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c)
      if (votes[c] > votes[best]) best = c;
    return static_cast<double>(best);
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_one(X.row(r).transpose());
    return out;
  }
};

inline std::size_t features_per_split(FeatureSubsetRule rule, TreeTask task, std::size_t p) {
  if (rule == FeatureSubsetRule::All || p == 0) return 0;
  const double k = task == TreeTask::Classification ? std::ceil(std::sqrt(static_cast<double>(p)))
                                                    : std::ceil(static_cast<double>(p) / 3.0);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

/// Random forest: each tree sees a bootstrap resample (when enabled) and a
/// random feature subset at every split. Tree t is seeded with split_seed(seed, t).
inline ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TreeTask task,
                              const ForestConfig& config, std::uint64_t seed) {
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "no training rows");
  if (config.n_trees == 0) fail(ErrorCode::InvalidArgument, "forest needs at least one tree");
  ForestModel f;
  f.task = task;
  f.n_features = static_cast<std::size_t>(X.cols());
  f.n_classes = task == TreeTask::Classification ? detail::class_count(y) : 0;
  f.feature_subset = config.feature_subset;
  f.bootstrap = config.bootstrap;
  TreeConfig tc = config.tree;
  tc.max_features = features_per_split(config.feature_subset, task, f.n_features);
  const auto n = static_cast<std::size_t>(X.rows());
  f.trees.resize(config.n_trees);
  f.tree_seeds.resize(config.n_trees);
  parallel_for(config.n_trees, config.jobs, [&](std::size_t t) {
    const auto s = split_seed(seed, t);
    f.tree_seeds[t] = s;
    Rng rng(s);
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    f.trees[t] = fit_tree_rows(X, y, task, tc, std::move(rows), f.n_classes, &rng);
  });
  return f;
}

inline nlohmann::json to_json(const ForestModel& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : f.trees) trees.push_back(to_json(t));
  return {{"task", f.task == TreeTask::Regression ? "regression" : "classification"},
          {"n_features", f.n_features},
          {"n_classes", f.n_classes},
          {"bootstrap", f.bootstrap},
          {"feature_subset", f.feature_subset == FeatureSubsetRule::All ? "all" : "auto"},
          {"tree_seeds", f.tree_seeds},
          {"trees", trees}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel f;
  f.task = j.at("task").get<std::string>() == "regression" ? TreeTask::Regression : TreeTask::Classification;
  f.n_features = j.at("n_features").get<std::size_t>();
  f.n_classes = j.at("n_classes").get<std::size_t>();
  f.bootstrap = j.at("bootstrap").get<bool>();
  f.feature_subset = j.at("feature_subset").get<std::string>() == "all" ? FeatureSubsetRule::All : FeatureSubsetRule::Auto;
  f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& jt : j.at("trees")) f.trees.push_back(tree_from_json(jt));
  if (f.trees.empty()) fail(ErrorCode::Parse, "forest without trees");
  return f;
}

}  // namespace cgpa
