#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cgpa/core/error.hpp"

namespace cgpa {

/// Directed pair of node indices (from, to).
using Edge = std::pair<std::size_t, std::size_t>;

namespace detail {

inline std::size_t node_index(const std::vector<std::string>& nodes, std::string_view name) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == name) return i;
  fail(ErrorCode::NodeMismatch, "unknown node '" + std::string(name) + "'");
}

inline void check_unique_nodes(const std::vector<std::string>& nodes) {
  std::set<std::string> s(nodes.begin(), nodes.end());
  if (s.size() != nodes.size()) fail(ErrorCode::InvalidArgument, "duplicate node names");
}

}  // namespace detail

/// Directed acyclic graph over named nodes. Every mutation keeps it acyclic.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes)
      : nodes_(std::move(nodes)), adj_(nodes_.size(), std::vector<char>(nodes_.size(), 0)) {
    detail::check_unique_nodes(nodes_);
  }

  Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges) : Dag(std::move(nodes)) {
    for (auto [a, b] : edges) add_edge(a, b);
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t index_of(std::string_view name) const { return detail::node_index(nodes_, name); }

  bool has_edge(std::size_t from, std::size_t to) const { return adj_[from][to] != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }

  /// True if a directed path from `from` to `to` exists (from == to counts).
  bool reachable(std::size_t from, std::size_t to) const {
    if (from == to) return true;
    std::vector<char> seen(size(), 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < size(); ++w) {
        if (!adj_[v][w] || seen[w]) continue;
        if (w == to) return true;
        seen[w] = 1;
        stack.push_back(w);
      }
    }
    return false;
  }

  bool would_create_cycle(std::size_t from, std::size_t to) const {
    return from == to || reachable(to, from);
  }

  void add_edge(std::size_t from, std::size_t to) {
    check(from, to);
    if (has_edge(from, to)) fail(ErrorCode::InvalidArgument, "duplicate edge " + label(from, to));
    if (would_create_cycle(from, to)) fail(ErrorCode::CyclicSpec, "edge " + label(from, to) + " closes a cycle");
    adj_[from][to] = 1;
    ++edge_count_;
  }

  void add_edge(std::string_view from, std::string_view to) { add_edge(index_of(from), index_of(to)); }

  void remove_edge(std::size_t from, std::size_t to) {
    check(from, to);
    if (!has_edge(from, to)) fail(ErrorCode::InvalidArgument, "no edge " + label(from, to));
    adj_[from][to] = 0;
    --edge_count_;
  }

  std::size_t edge_count() const { return edge_count_; }

  /// Edges in (from, to) index order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b)
        if (adj_[a][b]) out.emplace_back(a, b);
    return out;
  }

  std::vector<std::size_t> parents(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < size(); ++a)
      if (adj_[a][v]) out.push_back(a);
    return out;
  }

  std::vector<std::size_t> children(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < size(); ++b)
      if (adj_[v][b]) out.push_back(b);
    return out;
  }

  /// Strict descendants of v.
  std::vector<char> descendants(std::size_t v) const {
    std::vector<char> seen(size(), 0);
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < size(); ++w)
        if (adj_[u][w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    return seen;
  }

  /// Kahn's algorithm; ties resolved by lowest index.
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indeg(size(), 0);
    for (auto [a, b] : edges()) ++indeg[b];
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < size(); ++i)
      if (indeg[i] == 0) ready.insert(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      auto v = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(v);
      for (std::size_t w = 0; w < size(); ++w)
        if (adj_[v][w] && --indeg[w] == 0) ready.insert(w);
    }
    return order;
  }

  /// Same graph with nodes relabelled: node i of the result is node perm[i] of this one.
  Dag permuted(const std::vector<std::size_t>& perm) const {
    std::vector<std::size_t> inv(size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    Dag out(nodes_);
    for (auto [a, b] : edges()) out.add_edge(inv[a], inv[b]);
    return out;
  }

  bool operator==(const Dag& o) const { return nodes_ == o.nodes_ && adj_ == o.adj_; }

 private:
  void check(std::size_t a, std::size_t b) const {
    if (a >= size() || b >= size()) fail(ErrorCode::NodeMismatch, "node index out of range");
    if (a == b) fail(ErrorCode::InvalidArgument, "self-loop on '" + nodes_[a] + "'");
  }
  std::string label(std::size_t a, std::size_t b) const { return nodes_[a] + "->" + nodes_[b]; }

  std::vector<std::string> nodes_;
  std::vector<std::vector<char>> adj_;
  std::size_t edge_count_ = 0;
};

/// Mixed graph: directed edges plus undirected edges (stored with a < b).
class PartiallyDirectedGraph {
 public:
  PartiallyDirectedGraph() = default;
  explicit PartiallyDirectedGraph(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    detail::check_unique_nodes(nodes_);
  }

  static PartiallyDirectedGraph from_dag(const Dag& d) {
    PartiallyDirectedGraph g(d.nodes());
    for (auto e : d.edges()) g.add_directed(e.first, e.second);
    return g;
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t index_of(std::string_view name) const { return detail::node_index(nodes_, name); }

  const std::set<Edge>& directed() const { return directed_; }
  const std::set<Edge>& undirected() const { return undirected_; }

  bool has_directed(std::size_t a, std::size_t b) const { return directed_.count({a, b}) > 0; }
  bool has_undirected(std::size_t a, std::size_t b) const {
    return undirected_.count(key(a, b)) > 0;
  }
  bool adjacent(std::size_t a, std::size_t b) const {
    return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
  }

  void add_directed(std::size_t a, std::size_t b) {
    check(a, b);
    if (adjacent(a, b)) fail(ErrorCode::InvalidArgument, "pair already has an edge");
    directed_.insert({a, b});
  }
  void add_undirected(std::size_t a, std::size_t b) {
    check(a, b);
    if (adjacent(a, b)) fail(ErrorCode::InvalidArgument, "pair already has an edge");
    undirected_.insert(key(a, b));
  }
  void remove_pair(std::size_t a, std::size_t b) {
    directed_.erase({a, b});
    directed_.erase({b, a});
    undirected_.erase(key(a, b));
  }
  /// Replaces the undirected edge a—b with a→b.
  void orient(std::size_t a, std::size_t b) {
    if (!has_undirected(a, b)) fail(ErrorCode::InvalidArgument, "pair is not undirected");
    undirected_.erase(key(a, b));
    directed_.insert({a, b});
  }

  std::vector<std::size_t> neighbors(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < size(); ++u)
      if (u != v && adjacent(u, v)) out.push_back(u);
    return out;
  }

  std::size_t edge_count() const { return directed_.size() + undirected_.size(); }

  bool operator==(const PartiallyDirectedGraph&) const = default;

 private:
  static Edge key(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  void check(std::size_t a, std::size_t b) const {
    if (a >= size() || b >= size()) fail(ErrorCode::NodeMismatch, "node index out of range");
    if (a == b) fail(ErrorCode::InvalidArgument, "self-loop");
  }

  std::vector<std::string> nodes_;
  std::set<Edge> directed_;
  std::set<Edge> undirected_;
};

/// DAG with edge weights. weights(i, j) is the coefficient of node j in node i's
/// structural equation, so weights(i, j) != 0 exactly when j -> i is an edge.
class WeightedDag {
 public:
  WeightedDag() = default;
  WeightedDag(std::vector<std::string> nodes, Eigen::MatrixXd weights, double prune_threshold = 0.0)
      : dag_(std::move(nodes)), weights_(std::move(weights)), prune_threshold_(prune_threshold) {
    const auto p = dag_.size();
    if (static_cast<std::size_t>(weights_.rows()) != p || static_cast<std::size_t>(weights_.cols()) != p)
      fail(ErrorCode::DimensionMismatch, "weight matrix must be square over the nodes");
    // Insert heavier edges first so a cyclic matrix fails on its weakest edge.
    std::vector<std::pair<double, Edge>> order;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (weights_(i, j) != 0.0) {
          if (i == j) fail(ErrorCode::InvalidArgument, "self-loop weight");
          order.push_back({-std::abs(weights_(i, j)), Edge{j, i}});
        }
    std::sort(order.begin(), order.end());
    for (const auto& [w, e] : order) dag_.add_edge(e.first, e.second);
  }

  const Dag& dag() const { return dag_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double prune_threshold() const { return prune_threshold_; }
  double weight(std::size_t from, std::size_t to) const { return weights_(to, from); }

  bool operator==(const WeightedDag& o) const {
    return dag_ == o.dag_ && weights_ == o.weights_ && prune_threshold_ == o.prune_threshold_;
  }

 private:
  Dag dag_;
  Eigen::MatrixXd weights_;
  double prune_threshold_ = 0.0;
};

}  // namespace cgpa
