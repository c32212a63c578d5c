#pragma once

#include <cstddef>

#include <json.hpp>

#include "cgpa/causal/graph.hpp"

namespace cgpa {

struct GraphComparison {
  std::size_t shd = 0;
  double skeleton_precision = 1.0;
  double skeleton_recall = 1.0;
  double skeleton_f1 = 1.0;
  double orientation_accuracy = 1.0;
  std::size_t true_positive_adjacencies = 0;
};

/// Structural comparison of an estimate against the true DAG.
/// SHD counts one edit per pair whose adjacency differs and one per shared
/// adjacency whose mark differs (an undirected estimate needs one re-orientation).
/// Ratios with an empty denominator are 1.
inline GraphComparison graph_compare(const PartiallyDirectedGraph& est, const Dag& truth) {
  if (est.nodes() != truth.nodes()) fail(ErrorCode::NodeMismatch, "graphs are over different node lists");
  GraphComparison r;
  std::size_t est_edges = 0, true_edges = 0, tp = 0, oriented_ok = 0;
  const auto p = truth.size();
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      const bool e = est.adjacent(a, b);
      const bool t = truth.adjacent(a, b);
      est_edges += e;
      true_edges += t;
      if (e != t) {
        ++r.shd;
      } else if (e) {
        ++tp;
        const bool same = truth.has_edge(a, b) ? est.has_directed(a, b) : est.has_directed(b, a);
        if (same)
          ++oriented_ok;
        else
          ++r.shd;
      }
    }
  }
  r.true_positive_adjacencies = tp;
  r.skeleton_precision = est_edges ? static_cast<double>(tp) / static_cast<double>(est_edges) : 1.0;
  r.skeleton_recall = true_edges ? static_cast<double>(tp) / static_cast<double>(true_edges) : 1.0;
  const double s = r.skeleton_precision + r.skeleton_recall;
  r.skeleton_f1 = s > 0 ? 2.0 * r.skeleton_precision * r.skeleton_recall / s : 0.0;
  r.orientation_accuracy = tp ? static_cast<double>(oriented_ok) / static_cast<double>(tp) : 1.0;
  return r;
}

inline GraphComparison graph_compare(const Dag& est, const Dag& truth) {
  return graph_compare(PartiallyDirectedGraph::from_dag(est), truth);
}

inline nlohmann::json to_json(const GraphComparison& c) {
  return {{"shd", c.shd},
          {"skeleton_precision", c.skeleton_precision},
          {"skeleton_recall", c.skeleton_recall},
          {"skeleton_f1", c.skeleton_f1},
          {"orientation_accuracy", c.orientation_accuracy}};
}

}  // namespace cgpa
