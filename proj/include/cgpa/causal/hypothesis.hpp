#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgpa/causal/graph.hpp"
#include "cgpa/core/parallel.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/stats/ci_test.hpp"

namespace cgpa {

enum class ImpliedTestKind { Markov, TriangleMarginal, TriangleGivenMiddle };

/// One conditional-independence statement implied by a hypothesis graph.
struct ImpliedTest {
  ImpliedTestKind kind;
  std::size_t x;
  std::size_t y;
  std::vector<std::size_t> cond;
  std::size_t group;  // tests sharing a group form one check (a triangle has two)
};

struct ImpliedTestResult {
  ImpliedTest test;
  CiResult result;
  bool violated = false;
};

struct ViolationReport {
  double markov_violation_fraction = 0.0;
  double triangle_violation_fraction = 0.0;
  double markov_p = 1.0;
  double triangle_p = 1.0;
  std::size_t markov_tests = 0;
  std::size_t triangle_checks = 0;
  std::size_t n_permutations = 0;
  std::vector<ImpliedTestResult> per_test_detail;
};

/// Local Markov statements: node v is independent of every non-descendant u
/// outside its parents, given its parents. One entry per (v, u) pair.
inline std::vector<ImpliedTest> markov_tests(const Dag& dag) {
  std::vector<ImpliedTest> out;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const auto desc = dag.descendants(v);
    const auto pa = dag.parents(v);
    for (std::size_t u = 0; u < dag.size(); ++u) {
      if (u == v || desc[u] || dag.has_edge(u, v)) continue;
      out.push_back({ImpliedTestKind::Markov, v, u, pa, out.size()});
    }
  }
  return out;
}

/// Directed triangles X->Y, Y->Z, X->Z: X and Z must stay dependent both
/// marginally and given Y.
inline std::vector<ImpliedTest> triangle_tests(const Dag& dag) {
  std::vector<ImpliedTest> out;
  std::size_t group = 0;
  for (auto [x, y] : dag.edges())
    for (auto z : dag.children(y))
      if (dag.has_edge(x, z)) {
        out.push_back({ImpliedTestKind::TriangleMarginal, x, z, {}, group});
        out.push_back({ImpliedTestKind::TriangleGivenMiddle, x, z, {y}, group});
        ++group;
      }
  return out;
}

namespace detail {

struct ViolationCounts {
  std::size_t markov_total = 0, markov_violated = 0;
  std::size_t triangle_total = 0, triangle_violated = 0;
  double markov_fraction() const {
    return markov_total ? static_cast<double>(markov_violated) / static_cast<double>(markov_total) : 0.0;
  }
  double triangle_fraction() const {
    return triangle_total ? static_cast<double>(triangle_violated) / static_cast<double>(triangle_total) : 0.0;
  }
};

inline ViolationCounts count_violations(const Dag& dag, const FisherZTester& tester,
                                        std::vector<ImpliedTestResult>* detail_out) {
  ViolationCounts c;
  for (const auto& t : markov_tests(dag)) {
    auto r = tester.test(t.x, t.y, t.cond);
    const bool violated = !r.independent;
    ++c.markov_total;
    c.markov_violated += violated;
    if (detail_out) detail_out->push_back({t, r, violated});
  }
  const auto tri = triangle_tests(dag);
  for (std::size_t i = 0; i < tri.size(); i += 2) {
    auto r0 = tester.test(tri[i].x, tri[i].y, tri[i].cond);
    auto r1 = tester.test(tri[i + 1].x, tri[i + 1].y, tri[i + 1].cond);
    ++c.triangle_total;
    c.triangle_violated += (r0.independent || r1.independent);
    if (detail_out) {
      detail_out->push_back({tri[i], r0, r0.independent});
      detail_out->push_back({tri[i + 1], r1, r1.independent});
    }
  }
  return c;
}

inline Dag align_to_columns(const NumericDataset& ds, const Dag& dag) {
  if (dag.size() != ds.cols()) fail(ErrorCode::NodeMismatch, "graph and data have different variables");
  Dag aligned(ds.columns());
  for (auto [a, b] : dag.edges())
    aligned.add_edge(ds.column_index(dag.nodes()[a]), ds.column_index(dag.nodes()[b]));
  return aligned;
}

}  // namespace detail

/// Violation fractions of the graph's implied tests without the permutation null.
inline std::pair<double, double> violation_fractions(const NumericDataset& ds, const Dag& dag, double alpha) {
  FisherZTester tester(ds, alpha);
  auto c = detail::count_violations(detail::align_to_columns(ds, dag), tester, nullptr);
  return {c.markov_fraction(), c.triangle_fraction()};
}

/// Checks the local Markov statements and directed-triangle dependences of a
/// hypothesis DAG. Each p-value is the share of node-relabelled copies of the
/// DAG whose violation fraction is at most the observed one.
inline ViolationReport evaluate_hypothesis_graph(const NumericDataset& ds, const Dag& dag, double alpha,
                                                 std::size_t n_permutations, std::uint64_t seed,
                                                 std::size_t jobs = 1) {
  if (n_permutations < 100) fail(ErrorCode::InvalidArgument, "need at least 100 permutations");
  const Dag aligned = detail::align_to_columns(ds, dag);
  FisherZTester tester(ds, alpha);

  ViolationReport rep;
  const auto observed = detail::count_violations(aligned, tester, &rep.per_test_detail);
  rep.markov_violation_fraction = observed.markov_fraction();
  rep.triangle_violation_fraction = observed.triangle_fraction();
  rep.markov_tests = observed.markov_total;
  rep.triangle_checks = observed.triangle_total;
  rep.n_permutations = n_permutations;

  std::vector<detail::ViolationCounts> null(n_permutations);
  parallel_for(n_permutations, jobs, [&](std::size_t i) {
    Rng rng(split_seed(seed, i));
    null[i] = detail::count_violations(aligned.permuted(rng.permutation(aligned.size())), tester, nullptr);
  });
  std::size_t markov_le = 0, triangle_le = 0;
  for (const auto& c : null) {
    markov_le += c.markov_fraction() <= rep.markov_violation_fraction;
    triangle_le += c.triangle_fraction() <= rep.triangle_violation_fraction;
  }
  rep.markov_p = static_cast<double>(markov_le) / static_cast<double>(n_permutations);
  rep.triangle_p = static_cast<double>(triangle_le) / static_cast<double>(n_permutations);
  return rep;
}

inline std::string_view to_string(ImpliedTestKind k) {
  switch (k) {
    case ImpliedTestKind::Markov: return "markov";
    case ImpliedTestKind::TriangleMarginal: return "triangle_marginal";
    case ImpliedTestKind::TriangleGivenMiddle: return "triangle_given_middle";
  }
  return "markov";
}

inline nlohmann::json to_json(const ViolationReport& r, const std::vector<std::string>& names) {
  nlohmann::json detail = nlohmann::json::array();
  for (const auto& t : r.per_test_detail) {
    std::vector<std::string> cond;
    for (auto c : t.test.cond) cond.push_back(names[c]);
    detail.push_back({{"kind", to_string(t.test.kind)},
                      {"x", names[t.test.x]},
                      {"y", names[t.test.y]},
                      {"cond", cond},
                      {"statistic", t.result.statistic},
                      {"p_value", t.result.p_value},
                      {"violated", t.violated}});
  }
  return {{"markov_violation_fraction", r.markov_violation_fraction},
          {"triangle_violation_fraction", r.triangle_violation_fraction},
          {"markov_p", r.markov_p},
          {"triangle_p", r.triangle_p},
          {"markov_tests", r.markov_tests},
          {"triangle_checks", r.triangle_checks},
          {"n_permutations", r.n_permutations},
          {"per_test_detail", detail}};
}

}  // namespace cgpa
