#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "cgpa/causal/bic.hpp"
#include "cgpa/causal/graph.hpp"
#include "cgpa/data/dataset.hpp"

namespace cgpa {

struct GreedySearchResult {
  Dag dag;
  std::vector<double> objective_trace;  // objective after each accepted move, starting with the empty graph
  std::size_t additions = 0;
  std::size_t deletions = 0;
  std::size_t reversals = 0;
};

namespace detail {

enum class MoveKind { Add, Delete, Reverse };

struct Move {
  MoveKind kind = MoveKind::Add;
  std::size_t from = 0, to = 0;
  double gain = 0.0;
  double local_to = 0.0;    // new local score of `to` (the head after the move for Add/Delete)
  double local_from = 0.0;  // Reverse only: new local score of `from`
};

inline std::vector<std::size_t> with_parent(std::vector<std::size_t> pa, std::size_t u) {
  pa.insert(std::upper_bound(pa.begin(), pa.end(), u), u);
  return pa;
}

inline std::vector<std::size_t> without_parent(std::vector<std::size_t> pa, std::size_t u) {
  pa.erase(std::find(pa.begin(), pa.end(), u));
  return pa;
}

}  // namespace detail

/// Greedy search over DAGs with single-edge moves, maximising
/// BIC(G) - edge_penalty * |edges(G)|. Phase one applies the best edge
/// addition or reversal while the objective improves; phase two applies the
/// best deletion or reversal while it improves. The phases alternate until
/// neither changes the graph. Equal gains are resolved by move kind, then by
/// (from, to) in lexicographic name order.
inline GreedySearchResult greedy_bic_search(const NumericDataset& ds, double edge_penalty) {
  if (edge_penalty < 0) fail(ErrorCode::InvalidArgument, "edge penalty must be non-negative");
  BicScorer scorer(ds);
  const auto p = ds.cols();
  const auto& names = ds.columns();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });

  GreedySearchResult res{Dag(names), {}, 0, 0, 0};
  auto& dag = res.dag;
  std::vector<double> local(p);
  double objective = 0.0;
  for (std::size_t v = 0; v < p; ++v) {
    local[v] = scorer.local_score(v, {});
    objective += local[v];
  }
  res.objective_trace.push_back(objective);

  auto better = [&](const detail::Move& m, const std::optional<detail::Move>& best) {
    // Score-equivalent moves differ only by rounding; demand a real improvement.
    if (!(m.gain > 1e-9 * (1.0 + std::abs(objective)))) return false;
    if (!best) return true;
    if (m.gain != best->gain) return m.gain > best->gain;
    if (m.kind != best->kind) return m.kind < best->kind;
    return std::make_pair(names[m.from], names[m.to]) < std::make_pair(names[best->from], names[best->to]);
  };

  auto best_reversal = [&](std::optional<detail::Move>& best) {
    for (auto [from, to] : dag.edges()) {
      dag.remove_edge(from, to);
      const bool cyclic = dag.would_create_cycle(to, from);
      dag.add_edge(from, to);
      if (cyclic) continue;
      const double s_to = scorer.local_score(to, detail::without_parent(dag.parents(to), from));
      const double s_from = scorer.local_score(from, detail::with_parent(dag.parents(from), to));
      detail::Move m{detail::MoveKind::Reverse, from, to, s_to + s_from - local[to] - local[from], s_to, s_from};
      if (better(m, best)) best = m;
    }
  };

  auto apply = [&](const detail::Move& m) {
    switch (m.kind) {
      case detail::MoveKind::Add:
        dag.add_edge(m.from, m.to);
        ++res.additions;
        break;
      case detail::MoveKind::Delete:
        dag.remove_edge(m.from, m.to);
        ++res.deletions;
        break;
      case detail::MoveKind::Reverse:
        dag.remove_edge(m.from, m.to);
        dag.add_edge(m.to, m.from);
        local[m.from] = m.local_from;
        ++res.reversals;
        break;
    }
    local[m.to] = m.local_to;
    objective += m.gain;
    res.objective_trace.push_back(objective);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    while (true) {
      std::optional<detail::Move> best;
      for (auto to : order) {
        const auto parents = dag.parents(to);
        for (auto from : order) {
          if (from == to || dag.adjacent(from, to) || dag.would_create_cycle(from, to)) continue;
          const double s = scorer.local_score(to, detail::with_parent(parents, from));
          detail::Move m{detail::MoveKind::Add, from, to, s - local[to] - edge_penalty, s, 0.0};
          if (better(m, best)) best = m;
        }
      }
      best_reversal(best);
      if (!best) break;
      apply(*best);
      changed = true;
    }
    while (true) {
      std::optional<detail::Move> best;
      for (auto [from, to] : dag.edges()) {
        const double s = scorer.local_score(to, detail::without_parent(dag.parents(to), from));
        detail::Move m{detail::MoveKind::Delete, from, to, s - local[to] + edge_penalty, s, 0.0};
        if (better(m, best)) best = m;
      }
      best_reversal(best);
      if (!best) break;
      apply(*best);
      changed = true;
    }
  }
  return res;
}

/// Greedy BIC search from the empty graph (edge penalty zero).
inline Dag ges_discover(const NumericDataset& ds) { return greedy_bic_search(ds, 0.0).dag; }

/// Greedy search on the sparsity-penalised objective BIC(G) - lambda * |edges(G)|.
inline Dag grasp_discover(const NumericDataset& ds, double lambda) {
  return greedy_bic_search(ds, lambda).dag;
}

}  // namespace cgpa
