#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cgpa/causal/graph.hpp"
#include "cgpa/causal/ica.hpp"
#include "cgpa/data/dataset.hpp"

namespace cgpa {

struct LingamOptions {
  double prune_threshold = 0.05;
  std::uint64_t seed = 0;
  std::size_t max_iters = 1000;
  std::size_t exhaustive_limit = 8;  // exhaustive permutation search up to this many nodes
};

struct LingamResult {
  WeightedDag graph;
  std::vector<std::size_t> causal_order;
  Eigen::MatrixXd raw_weights;  // B before ordering and pruning
};

namespace detail {

/// Row permutation of `w` minimising sum_i 1/|W_perm(i,i)|.
/// perm[k] is the row of `w` placed at position k.
inline std::vector<std::size_t> diagonal_permutation(const Eigen::MatrixXd& w, std::size_t exhaustive_limit) {
  const auto p = static_cast<std::size_t>(w.rows());
  Eigen::MatrixXd cost(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double a = std::abs(w(i, j));
      cost(i, j) = a > 1e-300 ? 1.0 / a : 1e300;
    }
  std::vector<std::size_t> perm(p);
  if (p <= exhaustive_limit) {
    std::vector<std::size_t> cur(p);
    std::iota(cur.begin(), cur.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (std::size_t k = 0; k < p; ++k) c += cost(cur[k], k);
      if (c < best) {
        best = c;
        perm = cur;
      }
    } while (std::next_permutation(cur.begin(), cur.end()));
    return perm;
  }
  auto assign = min_cost_assignment(cost);  // row -> position
  for (std::size_t r = 0; r < p; ++r) perm[assign[r]] = r;
  return perm;
}

inline double upper_mass(const Eigen::MatrixXd& b, const std::vector<std::size_t>& order) {
  double m = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) m += b(order[i], order[j]) * b(order[i], order[j]);
  return m;
}

/// Node order that makes B as close to strictly lower-triangular as possible:
/// exhaustive for small graphs, otherwise greedily choose the node with the
/// least squared incoming weight from the nodes not yet placed.
inline std::vector<std::size_t> causal_order(const Eigen::MatrixXd& b, std::size_t exhaustive_limit) {
  const auto p = static_cast<std::size_t>(b.rows());
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (p <= exhaustive_limit) {
    auto best_order = order;
    double best = std::numeric_limits<double>::infinity();
    do {
      const double m = upper_mass(b, order);
      if (m < best) {
        best = m;
        best_order = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    return best_order;
  }
  std::vector<char> placed(p, 0);
  order.clear();
  for (std::size_t step = 0; step < p; ++step) {
    std::size_t pick = p;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p; ++i) {
      if (placed[i]) continue;
      double m = 0.0;
      for (std::size_t j = 0; j < p; ++j)
        if (j != i && !placed[j]) m += b(i, j) * b(i, j);
      if (m < best) {
        best = m;
        pick = i;
      }
    }
    placed[pick] = 1;
    order.push_back(pick);
  }
  return order;
}

}  // namespace detail

/// ICA-based LiNGAM: unmixing matrix from FastICA, row permutation to a
/// zero-free diagonal, row normalisation, B = I - W', then the causal order
/// that minimises the mass above the diagonal. Entries against that order and
/// entries below the prune threshold are zeroed.
inline LingamResult ica_lingam_detailed(const NumericDataset& ds, const LingamOptions& opt = {}) {
  const auto p = ds.cols();
  auto ica = fast_ica(ds.matrix(), {opt.max_iters, 1e-6, opt.seed});
  const Eigen::MatrixXd& w = ica.unmixing;

  const auto perm = detail::diagonal_permutation(w, opt.exhaustive_limit);
  Eigen::MatrixXd wp(w.rows(), w.cols());
  for (std::size_t k = 0; k < p; ++k) wp.row(k) = w.row(perm[k]) / w(perm[k], k);

  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(w.rows(), w.cols()) - wp;
  b.diagonal().setZero();
  LingamResult res;
  res.raw_weights = b;
  res.causal_order = detail::causal_order(b, opt.exhaustive_limit);

  std::vector<std::size_t> position(p);
  for (std::size_t k = 0; k < p; ++k) position[res.causal_order[k]] = k;
  Eigen::MatrixXd pruned = b;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (i == j || position[j] > position[i] || std::abs(pruned(i, j)) < opt.prune_threshold) pruned(i, j) = 0.0;
  res.graph = WeightedDag(ds.columns(), std::move(pruned), opt.prune_threshold);
  return res;
}

inline WeightedDag ica_lingam(const NumericDataset& ds, double prune_threshold = 0.05, std::uint64_t seed = 0) {
  return ica_lingam_detailed(ds, {prune_threshold, seed}).graph;
}

}  // namespace cgpa
