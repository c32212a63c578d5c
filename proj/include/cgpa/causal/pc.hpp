#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "cgpa/causal/graph.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/stats/ci_test.hpp"

namespace cgpa {

struct PcOptions {
  double alpha = 0.05;
  std::size_t max_cond_size = 4;
};

struct PcResult {
  PartiallyDirectedGraph graph;
  std::map<Edge, std::vector<std::size_t>> sepsets;  // keyed by (min, max)
  std::size_t tests_run = 0;
};

namespace detail {

/// Calls fn(subset) for every size-k subset of `pool` in lexicographic order
/// until fn returns true. Returns whether any call did.
template <class Fn>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k, Fn&& fn) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  std::vector<std::size_t> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[pick[i]];
    if (fn(subset)) return true;
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == pool.size() - k + (i - 1)) --i;
    if (i == 0) return false;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

/// Meek rules 1-3 applied to closure.
inline void apply_meek_rules(PartiallyDirectedGraph& g) {
  const auto p = g.size();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Edge> und(g.undirected().begin(), g.undirected().end());
    for (auto [u, v] : und) {
      for (auto [b, c] : {Edge{u, v}, Edge{v, u}}) {
        if (!g.has_undirected(b, c)) continue;
        bool orient = false;
        // R1: a -> b - c, a and c non-adjacent.
        for (std::size_t a = 0; a < p && !orient; ++a)
          if (a != c && g.has_directed(a, b) && !g.adjacent(a, c)) orient = true;
        // R2: b -> a -> c with b - c.
        for (std::size_t a = 0; a < p && !orient; ++a)
          if (g.has_directed(b, a) && g.has_directed(a, c)) orient = true;
        // R3: b - x, b - y, x -> c, y -> c, x and y non-adjacent.
        if (!orient) {
          std::vector<std::size_t> xs;
          for (std::size_t x = 0; x < p; ++x)
            if (g.has_undirected(b, x) && g.has_directed(x, c)) xs.push_back(x);
          for (std::size_t i = 0; i < xs.size() && !orient; ++i)
            for (std::size_t j = i + 1; j < xs.size() && !orient; ++j)
              if (!g.adjacent(xs[i], xs[j])) orient = true;
        }
        if (orient) {
          g.orient(b, c);
          changed = true;
        }
      }
    }
  }
}

}  // namespace detail

/// PC search with order-independent (stable) skeleton phase, v-structure
/// orientation from separating sets and Meek closure.
inline PcResult pc_discover_detailed(const NumericDataset& ds, const PcOptions& opt = {}) {
  const auto p = ds.cols();
  if (ds.rows() <= p + 3)
    fail(ErrorCode::TooFewSamples, "PC needs more than n_cols + 3 rows");
  FisherZTester tester(ds, opt.alpha);

  std::vector<std::vector<char>> adj(p, std::vector<char>(p, 1));
  for (std::size_t i = 0; i < p; ++i) adj[i][i] = 0;
  PcResult res;

  for (std::size_t level = 0; level <= opt.max_cond_size; ++level) {
    std::vector<std::vector<std::size_t>> frozen(p);
    bool any = false;
    for (std::size_t x = 0; x < p; ++x)
      for (std::size_t y = 0; y < p; ++y)
        if (adj[x][y]) frozen[x].push_back(y);
    for (std::size_t x = 0; x < p; ++x) {
      for (std::size_t y : frozen[x]) {
        if (!adj[x][y]) continue;
        std::vector<std::size_t> pool;
        for (auto z : frozen[x])
          if (z != y) pool.push_back(z);
        if (pool.size() < level) continue;
        any = true;
        detail::for_each_subset(pool, level, [&](const std::vector<std::size_t>& s) {
          ++res.tests_run;
          if (!tester.test(x, y, s).independent) return false;
          adj[x][y] = adj[y][x] = 0;
          res.sepsets[{std::min(x, y), std::max(x, y)}] = s;
          return true;
        });
      }
    }
    if (!any) break;
  }

  PartiallyDirectedGraph g(ds.columns());
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      if (adj[a][b]) g.add_undirected(a, b);

  // Unshielded colliders x -> z <- y where z is outside sepset(x, y).
  for (std::size_t x = 0; x < p; ++x) {
    for (std::size_t y = x + 1; y < p; ++y) {
      if (adj[x][y]) continue;
      const auto it = res.sepsets.find({x, y});
      for (std::size_t z = 0; z < p; ++z) {
        if (!adj[x][z] || !adj[y][z]) continue;
        if (it != res.sepsets.end() &&
            std::find(it->second.begin(), it->second.end(), z) != it->second.end())
          continue;
        if (g.has_undirected(x, z)) g.orient(x, z);
        if (g.has_undirected(y, z)) g.orient(y, z);
      }
    }
  }
  detail::apply_meek_rules(g);
  res.graph = std::move(g);
  return res;
}

inline PartiallyDirectedGraph pc_discover(const NumericDataset& ds, double alpha = 0.05,
                                          std::size_t max_cond_size = 4) {
  return pc_discover_detailed(ds, {alpha, max_cond_size}).graph;
}

}  // namespace cgpa
