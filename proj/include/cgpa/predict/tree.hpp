#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"

namespace cgpa {

enum class TreeTask { Regression, Classification };

struct TreeConfig {
  std::size_t max_depth = 32;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // features tried per split; 0 = all
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;                // regression mean, or majority class for classification
  std::vector<double> distribution;  // class proportions (classification leaves and splits)
  std::size_t samples = 0;
  double impurity = 0.0;

  bool leaf() const { return feature < 0; }
};

/// Binary decision tree: rows with x[feature] <= threshold go left.
struct TreeModel {
  TreeTask task = TreeTask::Regression;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  TreeConfig config;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    std::size_t i = 0;
    while (!nodes[i].leaf()) i = static_cast<std::size_t>(x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
    return nodes[i];
  }

  double predict_one(const Eigen::Ref<const Eigen::VectorXd>& x) const { return leaf_for(x).value; }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_one(X.row(r).transpose());
    return out;
  }

  std::size_t depth() const {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t d = 0;
    while (!stack.empty()) {
      auto [i, k] = stack.back();
      stack.pop_back();
      d = std::max(d, k);
      if (!nodes[i].leaf()) {
        stack.push_back({static_cast<std::size_t>(nodes[i].left), k + 1});
        stack.push_back({static_cast<std::size_t>(nodes[i].right), k + 1});
      }
    }
    return d;
  }

  /// Total weighted impurity decrease per feature, normalised to sum to 1
  /// (all zeros for a single leaf).
  Eigen::VectorXd impurity_importance() const {
    Eigen::VectorXd imp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_features));
    for (const auto& nd : nodes) {
      if (nd.leaf()) continue;
      const auto& l = nodes[static_cast<std::size_t>(nd.left)];
      const auto& r = nodes[static_cast<std::size_t>(nd.right)];
      imp(nd.feature) += static_cast<double>(nd.samples) * nd.impurity -
                         static_cast<double>(l.samples) * l.impurity - static_cast<double>(r.samples) * r.impurity;
    }
    const double total = imp.sum();
    if (total > 0) imp /= total;
    return imp;
  }
};

namespace detail {

inline double gini(const std::vector<double>& counts, double n) {
  if (n <= 0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / n) * (c / n);
  return 1.0 - s;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TreeTask task, std::size_t n_classes,
              const TreeConfig& config, Rng* rng)
      : X_(X), y_(y), task_(task), k_(n_classes), cfg_(config), rng_(rng) {}

  TreeModel build(std::vector<std::size_t> rows) {
    model_.task = task_;
    model_.n_features = static_cast<std::size_t>(X_.cols());
    model_.n_classes = k_;
    model_.config = cfg_;
    grow(rows, 0);
    return std::move(model_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int make_node(const std::vector<std::size_t>& rows) {
    TreeNode nd;
    nd.samples = rows.size();
    const double n = static_cast<double>(rows.size());
    if (task_ == TreeTask::Regression) {
      double sum = 0.0, sq = 0.0;
      for (auto r : rows) {
        sum += y_(r);
        sq += y_(r) * y_(r);
      }
      nd.value = sum / n;
      nd.impurity = std::max(0.0, sq / n - nd.value * nd.value);
    } else {
      std::vector<double> counts(k_, 0.0);
      for (auto r : rows) counts[static_cast<std::size_t>(y_(r))] += 1.0;
      nd.impurity = gini(counts, n);
      std::size_t best = 0;
      for (std::size_t c = 1; c < k_; ++c)
        if (counts[c] > counts[best]) best = c;
      nd.value = static_cast<double>(best);
      nd.distribution.resize(k_);
      for (std::size_t c = 0; c < k_; ++c) nd.distribution[c] = counts[c] / n;
    }
    model_.nodes.push_back(std::move(nd));
    return static_cast<int>(model_.nodes.size() - 1);
  }

  std::vector<std::size_t> candidate_features() {
    const auto p = static_cast<std::size_t>(X_.cols());
    std::vector<std::size_t> f(p);
    std::iota(f.begin(), f.end(), std::size_t{0});
    if (cfg_.max_features == 0 || cfg_.max_features >= p || !rng_) return f;
    // Partial Fisher-Yates, then ascending order for the index tie-break.
    for (std::size_t i = 0; i < cfg_.max_features; ++i) {
      auto j = i + static_cast<std::size_t>(rng_->below(p - i));
      std::swap(f[i], f[j]);
    }
    f.resize(cfg_.max_features);
    std::sort(f.begin(), f.end());
    return f;
  }

  Split best_split(const std::vector<std::size_t>& rows, double parent_impurity) {
    Split best;
    const double n = static_cast<double>(rows.size());
    const std::size_t min_leaf = std::max<std::size_t>(1, cfg_.min_samples_leaf);
    std::vector<std::size_t> order = rows;
    for (auto f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X_(a, f) < X_(b, f) || (X_(a, f) == X_(b, f) && a < b);
      });
      if (task_ == TreeTask::Regression) {
        double total = 0.0, total_sq = 0.0;
        for (auto r : order) {
          total += y_(r);
          total_sq += y_(r) * y_(r);
        }
        double ls = 0.0, lsq = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          const double v = y_(order[i]);
          ls += v;
          lsq += v * v;
          const double a = X_(order[i], f), b = X_(order[i + 1], f);
          const std::size_t nl = i + 1, nr = order.size() - nl;
          if (a == b || nl < min_leaf || nr < min_leaf) continue;
          const double rs = total - ls, rsq = total_sq - lsq;
          const double sse_l = lsq - ls * ls / static_cast<double>(nl);
          const double sse_r = rsq - rs * rs / static_cast<double>(nr);
          const double gain = n * parent_impurity - sse_l - sse_r;
          if (gain > best.gain + 1e-12 * std::max(1.0, n * parent_impurity)) {
            best = {static_cast<int>(f), 0.5 * (a + b), gain};
          }
        }
      } else {
        std::vector<double> left(k_, 0.0), right(k_, 0.0);
        for (auto r : order) right[static_cast<std::size_t>(y_(r))] += 1.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          const auto c = static_cast<std::size_t>(y_(order[i]));
          left[c] += 1.0;
          right[c] -= 1.0;
          const double a = X_(order[i], f), b = X_(order[i + 1], f);
          const std::size_t nl = i + 1, nr = order.size() - nl;
          if (a == b || nl < min_leaf || nr < min_leaf) continue;
          const double gain = n * parent_impurity - static_cast<double>(nl) * gini(left, static_cast<double>(nl)) -
                              static_cast<double>(nr) * gini(right, static_cast<double>(nr));
          if (gain > best.gain + 1e-12 * std::max(1.0, n)) {
            best = {static_cast<int>(f), 0.5 * (a + b), gain};
          }
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = make_node(rows);
    const double impurity = model_.nodes[static_cast<std::size_t>(id)].impurity;
    if (depth >= cfg_.max_depth || impurity <= 0.0 || rows.size() < 2 * std::max<std::size_t>(1, cfg_.min_samples_leaf))
      return id;
    const Split s = best_split(rows, impurity);
    if (s.feature < 0) return id;
    std::vector<std::size_t> l, r;
    for (auto i : rows) (X_(i, s.feature) <= s.threshold ? l : r).push_back(i);
    const int left = grow(l, depth + 1);
    const int right = grow(r, depth + 1);
    auto& nd = model_.nodes[static_cast<std::size_t>(id)];
    nd.feature = s.feature;
    nd.threshold = s.threshold;
    nd.left = left;
    nd.right = right;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  TreeTask task_;
  std::size_t k_;
  TreeConfig cfg_;
  Rng* rng_;
  TreeModel model_;
};

inline std::size_t class_count(const Eigen::VectorXd& y) {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < 0 || y(i) != std::floor(y(i))) fail(ErrorCode::InvalidArgument, "class labels must be non-negative integers");
    k = std::max(k, static_cast<std::size_t>(y(i)) + 1);
  }
  return k;
}

}  // namespace detail

/// Greedy CART: variance reduction (regression) or Gini decrease
/// (classification). Ties go to the lowest feature index, then the lowest
/// threshold. For classification, labels are 0..n_classes-1.
inline TreeModel fit_tree_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TreeTask task,
                               const TreeConfig& config, std::vector<std::size_t> rows, std::size_t n_classes = 0,
                               Rng* rng = nullptr) {
  if (X.rows() == 0 || rows.empty()) fail(ErrorCode::EmptyData, "no training rows");
  if (X.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "X and y row counts differ");
  if (task == TreeTask::Classification) n_classes = std::max(n_classes, detail::class_count(y));
  return detail::TreeBuilder(X, y, task, n_classes, config, rng).build(std::move(rows));
}

inline TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TreeTask task,
                          const TreeConfig& config = {}, std::size_t n_classes = 0) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree_rows(X, y, task, config, std::move(rows), n_classes);
}

inline nlohmann::json to_json(const TreeModel& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nlohmann::json j{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"value", n.value},     {"samples", n.samples},     {"impurity", n.impurity}};
    if (!n.distribution.empty()) j["distribution"] = n.distribution;
    nodes.push_back(std::move(j));
  }
  return {{"task", t.task == TreeTask::Regression ? "regression" : "classification"},
          {"n_features", t.n_features},
          {"n_classes", t.n_classes},
          {"max_depth", t.config.max_depth},
          {"min_samples_leaf", t.config.min_samples_leaf},
          {"max_features", t.config.max_features},
          {"nodes", nodes}};
}

inline TreeModel tree_from_json(const nlohmann::json& j) {
  TreeModel t;
  t.task = j.at("task").get<std::string>() == "regression" ? TreeTask::Regression : TreeTask::Classification;
  t.n_features = j.at("n_features").get<std::size_t>();
  t.n_classes = j.at("n_classes").get<std::size_t>();
  t.config = {j.at("max_depth").get<std::size_t>(), j.at("min_samples_leaf").get<std::size_t>(),
              j.at("max_features").get<std::size_t>()};
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.feature = jn.at("feature").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    n.value = jn.at("value").get<double>();
    n.samples = jn.at("samples").get<std::size_t>();
    n.impurity = jn.at("impurity").get<double>();
    if (jn.contains("distribution")) n.distribution = jn.at("distribution").get<std::vector<double>>();
    t.nodes.push_back(std::move(n));
  }
  if (t.nodes.empty()) fail(ErrorCode::Parse, "tree without nodes");
  return t;
}

}  // namespace cgpa
