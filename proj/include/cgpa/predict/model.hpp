#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/predict/classifiers.hpp"
#include "cgpa/predict/forest.hpp"
#include "cgpa/predict/linear.hpp"
#include "cgpa/predict/tree.hpp"

namespace cgpa {

using FittedModel = std::variant<LinearModel, TreeModel, ForestModel, LogisticModel, RidgeClassifierModel, KnnModel>;

enum class ModelKind { Linear, Ridge, Lasso, ElasticNet, Tree, Forest, Logistic, RidgeClassifier, Knn };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Lasso: return "lasso";
    case ModelKind::ElasticNet: return "elastic_net";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::RidgeClassifier: return "ridge_cls";
    case ModelKind::Knn: return "knn";
  }
  return "linear";
}

inline ModelKind model_kind_from_string(std::string_view s) {
  for (auto k : {ModelKind::Linear, ModelKind::Ridge, ModelKind::Lasso, ModelKind::ElasticNet, ModelKind::Tree,
                 ModelKind::Forest, ModelKind::Logistic, ModelKind::RidgeClassifier, ModelKind::Knn})
    if (to_string(k) == s) return k;
  fail(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(s) + "'");
}

/// Everything needed to fit one model; used by cross-validation and the trainer.
struct ModelSpec {
  ModelKind kind = ModelKind::Ridge;
  TreeTask task = TreeTask::Regression;  // meaningful for tree and forest
  double lambda = 1.0;                   // linear family and ridge classifier
  double mix = 0.5;                      // elastic net
  TreeConfig tree;
  ForestConfig forest;
  LogisticConfig logistic;
  std::size_t k = 5;  // knn
  std::uint64_t seed = 0;

  bool is_classifier() const {
    switch (kind) {
      case ModelKind::Logistic:
      case ModelKind::RidgeClassifier:
      case ModelKind::Knn: return true;
      case ModelKind::Tree:
      case ModelKind::Forest: return task == TreeTask::Classification;
      default: return false;
    }
  }
};

inline Penalty penalty_of(const ModelSpec& s) {
  switch (s.kind) {
    case ModelKind::Linear: return Penalty::none();
    case ModelKind::Ridge: return Penalty::ridge(s.lambda);
    case ModelKind::Lasso: return Penalty::lasso(s.lambda);
    case ModelKind::ElasticNet: return Penalty::elastic_net(s.lambda, s.mix);
    default: fail(ErrorCode::InvalidArgument, "model kind has no penalty");
  }
}

/// `n_classes` fixes the label space for classifiers (0 infers it from y).
inline FittedModel fit_model(const ModelSpec& s, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::size_t n_classes = 0) {
  switch (s.kind) {
    case ModelKind::Linear:
    case ModelKind::Ridge:
    case ModelKind::Lasso:
    case ModelKind::ElasticNet: return fit_linear_family(X, y, penalty_of(s));
    case ModelKind::Tree: return fit_tree(X, y, s.task, s.tree, n_classes);
    case ModelKind::Forest: {
      auto f = fit_forest(X, y, s.task, s.forest, s.seed);
      if (s.task == TreeTask::Classification && n_classes > f.n_classes) f.n_classes = n_classes;
      return f;
    }
    case ModelKind::Logistic: return fit_logistic(X, y, s.logistic, n_classes);
    case ModelKind::RidgeClassifier: return fit_ridge_classifier(X, y, s.lambda, n_classes);
    case ModelKind::Knn: return fit_knn(X, y, s.k, n_classes);
  }
  fail(ErrorCode::InvalidArgument, "unknown model kind");
}

inline std::size_t feature_count(const FittedModel& m) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) return static_cast<std::size_t>(v.weights.size());
        else if constexpr (std::is_same_v<T, TreeModel> || std::is_same_v<T, ForestModel>) return v.n_features;
        else if constexpr (std::is_same_v<T, KnnModel>) return static_cast<std::size_t>(v.X.cols());
        else return static_cast<std::size_t>(v.W.cols());
      },
      m);
}

inline bool is_classifier(const FittedModel& m) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) return false;
        else if constexpr (std::is_same_v<T, TreeModel> || std::is_same_v<T, ForestModel>)
          return v.task == TreeTask::Classification;
        else return true;
      },
      m);
}

inline Eigen::VectorXd predict(const FittedModel& m, const Eigen::MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != feature_count(m))
    fail(ErrorCode::DimensionMismatch, "model expects " + std::to_string(feature_count(m)) + " features, got " +
                                           std::to_string(X.cols()));
  return std::visit([&](const auto& v) -> Eigen::VectorXd { return v.predict(X); }, m);
}

inline double predict_one(const FittedModel& m, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != feature_count(m))
    fail(ErrorCode::DimensionMismatch, "model expects " + std::to_string(feature_count(m)) + " features, got " +
                                           std::to_string(x.size()));
  return std::visit([&](const auto& v) { return v.predict_one(x); }, m);
}

inline nlohmann::json to_json(const FittedModel& m) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return {{"type", "linear"},
                  {"weights", vector_to_json(v.weights)},
                  {"intercept", v.intercept},
                  {"penalty", to_json(v.penalty)},
                  {"excluded", v.excluded}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return {{"type", "tree"}, {"tree", to_json(v)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return {{"type", "forest"}, {"forest", to_json(v)}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"type", "logistic"}, {"W", matrix_to_json(v.W)}, {"b", vector_to_json(v.b)}, {"l2", v.l2}};
        } else if constexpr (std::is_same_v<T, RidgeClassifierModel>) {
          return {{"type", "ridge_cls"}, {"W", matrix_to_json(v.W)}, {"b", vector_to_json(v.b)}, {"lambda", v.lambda}};
        } else {
          return {{"type", "knn"},
                  {"k", v.k},
                  {"n_classes", v.n_classes},
                  {"X", matrix_to_json(v.X)},
                  {"y", vector_to_json(v.y)}};
        }
      },
      m);
}

inline FittedModel fitted_model_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearModel m;
    m.weights = vector_from_json(j.at("weights"));
    m.intercept = j.at("intercept").get<double>();
    m.penalty = penalty_from_json(j.at("penalty"));
    m.excluded = j.at("excluded").get<std::vector<std::size_t>>();
    return m;
  }
  if (type == "tree") return tree_from_json(j.at("tree"));
  if (type == "forest") return forest_from_json(j.at("forest"));
  if (type == "logistic") {
    LogisticModel m;
    m.W = matrix_from_json(j.at("W"));
    m.b = vector_from_json(j.at("b"));
    m.l2 = j.at("l2").get<double>();
    return m;
  }
  if (type == "ridge_cls") {
    RidgeClassifierModel m;
    m.W = matrix_from_json(j.at("W"));
    m.b = vector_from_json(j.at("b"));
    m.lambda = j.at("lambda").get<double>();
    return m;
  }
  if (type == "knn") {
    KnnModel m;
    m.k = j.at("k").get<std::size_t>();
    m.n_classes = j.at("n_classes").get<std::size_t>();
    m.X = matrix_from_json(j.at("X"));
    m.y = vector_from_json(j.at("y"));
    return m;
  }
  fail(ErrorCode::Parse, "unknown model type '" + type + "'");
}

}  // namespace cgpa
