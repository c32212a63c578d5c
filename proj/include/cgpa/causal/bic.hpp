#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cgpa/causal/graph.hpp"
#include "cgpa/core/error.hpp"
#include "cgpa/data/dataset.hpp"

namespace cgpa {

/// Decomposable Gaussian BIC: for each node, the maximised log-likelihood of a
/// linear regression on its parents, minus (k/2) log N with k = parents +
/// intercept + variance. Local terms are cached by (node, parent set).
class BicScorer {
 public:
  explicit BicScorer(const NumericDataset& ds) : BicScorer(ds.matrix(), ds.columns()) {}

  BicScorer(const Eigen::MatrixXd& data, std::vector<std::string> names) : names_(std::move(names)) {
    n_ = static_cast<std::size_t>(data.rows());
    if (n_ < 2) fail(ErrorCode::TooFewSamples, "BIC needs at least 2 rows");
    if (data.cols() > 64) fail(ErrorCode::InvalidArgument, "BIC scorer supports at most 64 variables");
    Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    cov_ = centered.transpose() * centered / static_cast<double>(n_);
  }

  std::size_t samples() const { return n_; }
  std::size_t variables() const { return static_cast<std::size_t>(cov_.rows()); }
  const std::vector<std::string>& names() const { return names_; }

  double local_score(std::size_t v, const std::vector<std::size_t>& parents) const {
    std::uint64_t mask = 0;
    for (auto u : parents) mask |= std::uint64_t{1} << u;
    const auto key = (mask << 6) ^ v;  // v < 64
    auto hit = cache_.find(key);
    if (hit != cache_.end() && hit->second.first == mask) return hit->second.second;
    const double s = compute_local(v, parents);
    cache_[key] = {mask, s};
    return s;
  }

  double score(const Dag& dag) const {
    if (dag.size() != variables()) fail(ErrorCode::NodeMismatch, "DAG and data differ in variable count");
    double total = 0.0;
    for (std::size_t v = 0; v < dag.size(); ++v) total += local_score(v, dag.parents(v));
    return total;
  }

 private:
  double compute_local(std::size_t v, const std::vector<std::size_t>& parents) const {
    double resid = cov_(v, v);
    const auto k = static_cast<Eigen::Index>(parents.size());
    if (k > 0) {
      Eigen::MatrixXd spp(k, k);
      Eigen::VectorXd spv(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        spv(a) = cov_(parents[a], v);
        for (Eigen::Index b = 0; b < k; ++b) spp(a, b) = cov_(parents[a], parents[b]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(spp);
      const auto d = ldlt.vectorD();
      if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1e-300, d.maxCoeff()))
        fail(ErrorCode::SingularRegression, "parent covariance of '" + names_[v] + "' is singular");
      resid -= spv.dot(ldlt.solve(spv));
    }
    if (!(resid > 1e-300)) fail(ErrorCode::SingularRegression, "zero residual variance for '" + names_[v] + "'");
    const double n = static_cast<double>(n_);
    const double loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * resid) + 1.0);
    const double params = static_cast<double>(parents.size()) + 2.0;
    return loglik - 0.5 * params * std::log(n);
  }

  std::vector<std::string> names_;
  std::size_t n_ = 0;
  Eigen::MatrixXd cov_;
  mutable std::unordered_map<std::uint64_t, std::pair<std::uint64_t, double>> cache_;
};

inline double bic_score(const NumericDataset& ds, const Dag& dag) {
  // Map DAG nodes onto dataset columns by name.
  std::vector<std::string> cols;
  for (const auto& n : dag.nodes()) cols.push_back(n);
  return BicScorer(ds.select_columns(cols)).score(dag);
}

}  // namespace cgpa
