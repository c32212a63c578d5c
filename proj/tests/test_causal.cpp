#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cgpa/causal/bic.hpp"
#include "cgpa/causal/compare.hpp"
#include "cgpa/causal/ges.hpp"
#include "cgpa/causal/graph_io.hpp"
#include "cgpa/causal/hypothesis.hpp"
#include "cgpa/causal/lingam.hpp"
#include "cgpa/causal/pc.hpp"
#include "cgpa/data/default_sem.hpp"
#include "cgpa/data/sem.hpp"
#include "support.hpp"

using namespace cgpa;
namespace ts = testing_support;

namespace {

NumericDataset sem_data(std::vector<std::string> nodes, std::vector<WeightedEdge> edges, std::size_t n,
                        std::uint64_t seed, NoiseKind noise = NoiseKind::Uniform) {
  SemSpec spec;
  spec.nodes = std::move(nodes);
  spec.edges = std::move(edges);
  for (const auto& v : spec.nodes)
    spec.noise[v] = noise == NoiseKind::Uniform ? NoiseSpec{NoiseKind::Uniform, -1.0, 1.0} : NoiseSpec{noise, 1.0, 0.0};
  spec.seed = seed;
  return generate_synthetic(spec, n).latent;
}

NumericDataset standardized(const NumericDataset& ds) {
  std::vector<ColumnScaling> s;
  for (std::size_t c = 0; c < ds.cols(); ++c) s.push_back(NumericDataset::fit_zscore(ds.matrix().col(c)));
  return ds.rescaled(s);
}

Dag random_dag(std::size_t p, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p; ++i) names.push_back("N" + std::to_string(i));
  auto order = rng.permutation(p);
  Dag d(names);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      if (rng.uniform() < density) d.add_edge(order[a], order[b]);
  return d;
}

std::set<std::pair<std::size_t, std::size_t>> skeleton(const PartiallyDirectedGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = a + 1; b < g.size(); ++b)
      if (g.adjacent(a, b)) s.insert({a, b});
  return s;
}

}  // namespace

TEST(Dag, RejectsCyclesSelfLoopsAndDuplicates) {
  Dag d({"A", "B", "C"});
  d.add_edge("A", "B");
  d.add_edge("B", "C");
  EXPECT_TRUE(d.would_create_cycle(2, 0));
  EXPECT_THROW(d.add_edge("C", "A"), Error);
  EXPECT_THROW(d.add_edge("A", "A"), Error);
  EXPECT_THROW(d.add_edge("A", "B"), Error);
  EXPECT_EQ(d.edge_count(), 2u);
  EXPECT_EQ(d.topological_order(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(Dag({"A", "A"}), Error);
}

TEST(Pdag, PairAppearsInOneEdgeSet) {
  PartiallyDirectedGraph g({"A", "B"});
  g.add_undirected(0, 1);
  g.orient(0, 1);
  EXPECT_TRUE(g.has_directed(0, 1));
  EXPECT_FALSE(g.has_undirected(0, 1));
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(Pc, IndependentColumnsGiveEmptyGraph) {
  const auto ds = sem_data({"X", "Y", "Z"}, {}, 2000, 1, NoiseKind::Gaussian);
  EXPECT_EQ(pc_discover(ds, 0.01, 3).edge_count(), 0u);
}

TEST(Pc, ChainSkeleton) {
  const auto ds = sem_data({"X", "Y", "Z"}, {{"X", "Y", 0.8}, {"Y", "Z", 0.8}}, 5000, 2, NoiseKind::Gaussian);
  const auto g = pc_discover(ds, 0.05, 3);
  EXPECT_TRUE(g.adjacent(0, 1));
  EXPECT_TRUE(g.adjacent(1, 2));
  EXPECT_FALSE(g.adjacent(0, 2));
  EXPECT_TRUE(g.has_undirected(0, 1));
  EXPECT_TRUE(g.has_undirected(1, 2));
}

TEST(Pc, ColliderOriented) {
  const auto ds = sem_data({"X", "Y", "Z"}, {{"X", "Z", 0.8}, {"Y", "Z", 0.8}}, 5000, 3, NoiseKind::Gaussian);
  const auto g = pc_discover(ds, 0.05, 3);
  EXPECT_TRUE(g.has_directed(0, 2));
  EXPECT_TRUE(g.has_directed(1, 2));
  EXPECT_FALSE(g.adjacent(0, 1));
}

TEST(Pc, MeekRuleOrientsDownstreamOfCollider) {
  const auto ds = sem_data({"X", "Y", "Z", "W"}, {{"X", "Z", 0.8}, {"Y", "Z", 0.8}, {"Z", "W", 0.8}}, 5000, 4,
                           NoiseKind::Gaussian);
  const auto g = pc_discover(ds, 0.05, 3);
  EXPECT_TRUE(g.has_directed(2, 3));
}

TEST(Pc, SkeletonIndependentOfColumnOrder) {
  for (auto edges : {std::vector<WeightedEdge>{{"X", "Y", 0.8}, {"Y", "Z", 0.8}},
                     std::vector<WeightedEdge>{{"X", "Z", 0.8}, {"Y", "Z", 0.8}}}) {
    const auto ds = sem_data({"X", "Y", "Z"}, edges, 5000, 5, NoiseKind::Gaussian);
    std::set<std::pair<std::string, std::string>> base;
    for (auto [a, b] : skeleton(pc_discover(ds, 0.05, 3))) base.insert({ds.columns()[a], ds.columns()[b]});
    Rng rng(6);
    for (int k = 0; k < 10; ++k) {
      auto cols = ds.columns();
      rng.shuffle(cols);
      const auto shuffled = ds.select_columns(cols);
      std::set<std::pair<std::string, std::string>> s;
      for (auto [a, b] : skeleton(pc_discover(shuffled, 0.05, 3))) {
        auto x = cols[a], y = cols[b];
        if (y < x) std::swap(x, y);
        s.insert({x, y});
      }
      EXPECT_EQ(s, base);
    }
  }
}

TEST(Pc, TooFewSamples) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(5, 3);
  try {
    pc_discover(NumericDataset(m, {"a", "b", "c"}), 0.05, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(Bic, EmptyGraphMatchesClosedForm) {
  const auto ds = standardized(sem_data({"A", "B", "C", "D"}, {}, 3000, 7, NoiseKind::Gaussian));
  const double n = 3000, p = 4;
  const double hand = -(n / 2) * (std::log(2 * std::numbers::pi) + 1) * p - (2 * p / 2) * std::log(n);
  const double s = bic_score(ds, Dag(ds.columns()));
  EXPECT_NEAR(s, hand, 0.01 * std::abs(hand));
}

TEST(Bic, LocalTermMatchesDirectRegression) {
  const auto ds = sem_data({"X", "Y", "Z"}, {{"X", "Z", 0.5}, {"Y", "Z", -0.7}}, 500, 8);
  const auto& m = ds.matrix();
  Eigen::MatrixXd design(500, 3);
  design << Eigen::VectorXd::Ones(500), m.col(0), m.col(1);
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(m.col(2));
  const double rss = (m.col(2) - design * beta).squaredNorm();
  const double n = 500;
  const double expected = -0.5 * n * (std::log(2 * std::numbers::pi * rss / n) + 1) - 0.5 * 4 * std::log(n);
  EXPECT_NEAR(BicScorer(ds).local_score(2, {0, 1}), expected, 1e-8 * std::abs(expected));
}

TEST(Bic, TrueEdgeHelpsSpuriousEdgeHurts) {
  const auto ds = sem_data({"X", "Y", "Z"}, {{"X", "Y", 0.8}}, 1000, 9, NoiseKind::Gaussian);
  Dag empty(ds.columns());
  Dag with_true = empty;
  with_true.add_edge("X", "Y");
  Dag with_false = empty;
  with_false.add_edge("X", "Z");
  EXPECT_GT(bic_score(ds, with_true), bic_score(ds, empty));
  EXPECT_LT(bic_score(ds, with_false), bic_score(ds, empty));
}

TEST(Bic, SingularRegression) {
  Eigen::MatrixXd m(100, 3);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.normal();
    m.row(i) << a, 2 * a, rng.normal();
  }
  const NumericDataset ds(m, {"a", "b", "c"});
  Dag d(ds.columns());
  d.add_edge("a", "c");
  d.add_edge("b", "c");
  try {
    bic_score(ds, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularRegression);
  }
}

TEST(Ges, IndependentColumnsGiveEmptyGraph) {
  EXPECT_EQ(ges_discover(sem_data({"A", "B", "C", "D"}, {}, 2000, 10)).edge_count(), 0u);
}

TEST(Ges, ChainSkeletonRecovered) {
  const auto ds = sem_data({"A", "B", "C", "D"}, {{"A", "B", 0.8}, {"B", "C", 0.8}, {"C", "D", 0.8}}, 5000, 11);
  const auto g = ges_discover(ds);
  const Dag truth(ds.columns(), {{0, 1}, {1, 2}, {2, 3}});
  const auto cmp = graph_compare(g, truth);
  EXPECT_EQ(cmp.skeleton_precision, 1.0);
  EXPECT_EQ(cmp.skeleton_recall, 1.0);
}

TEST(Ges, ObjectiveNeverDecreases) {
  auto spec = default_sem_spec();
  const auto d = generate_synthetic(spec, 2000);
  const auto res = greedy_bic_search(d.latent, 0.0);
  ASSERT_FALSE(res.objective_trace.empty());
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
    EXPECT_GT(res.objective_trace[i], res.objective_trace[i - 1]);
  EXPECT_GE(bic_score(d.latent, res.dag), bic_score(d.latent, Dag(d.latent.columns())));
  EXPECT_NEAR(res.objective_trace.back(), bic_score(d.latent, res.dag), 1e-6 * std::abs(res.objective_trace.back()));
}

TEST(Grasp, ZeroLambdaReproducesGes) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto spec = default_sem_spec();
    spec.seed = seed;
    const auto d = generate_synthetic(spec, 1000);
    EXPECT_EQ(grasp_discover(d.latent, 0.0), ges_discover(d.latent));
  }
}

TEST(Grasp, HugeLambdaGivesEmptyGraph) {
  const auto ds = sem_data({"A", "B", "C"}, {{"A", "B", 0.9}, {"B", "C", 0.9}}, 2000, 12);
  EXPECT_EQ(grasp_discover(ds, 1e9).edge_count(), 0u);
}

TEST(Grasp, EdgeCountMonotoneInLambda) {
  const auto ds = sem_data({"A", "B", "C", "D", "E"},
                           {{"A", "B", 0.6}, {"B", "C", 0.3}, {"A", "D", 0.15}, {"D", "E", 0.5}, {"C", "E", 0.1}},
                           1000, 13);
  std::size_t prev = SIZE_MAX;
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 1e9}) {
    const auto e = grasp_discover(ds, lambda).edge_count();
    EXPECT_LE(e, prev) << "lambda " << lambda;
    prev = e;
  }
  EXPECT_EQ(prev, 0u);
  EXPECT_THROW(grasp_discover(ds, -1.0), Error);
}

TEST(Lingam, TwoNodeEdgeAndWeight) {
  const auto ds = sem_data({"X1", "X2"}, {{"X1", "X2", 0.8}}, 5000, 14);
  const auto g = ica_lingam(ds, 0.05, 1);
  EXPECT_TRUE(g.dag().has_edge(0, 1));
  EXPECT_FALSE(g.dag().has_edge(1, 0));
  EXPECT_NEAR(g.weight(0, 1), 0.8, 0.1);
}

TEST(Lingam, IndependentColumnsPrunedToEmpty) {
  const auto ds = sem_data({"A", "B", "C", "D"}, {}, 5000, 15);
  const auto g = ica_lingam(ds, 0.05, 2);
  EXPECT_EQ(g.dag().edge_count(), 0u);
  EXPECT_LT(g.weights().cwiseAbs().maxCoeff(), 0.05 + 1e-15);
}

TEST(Lingam, DeterministicAndLowerTriangularInCausalOrder) {
  const auto ds = sem_data({"A", "B", "C", "D", "E"},
                           {{"A", "B", 0.7}, {"B", "C", -0.6}, {"A", "D", 0.5}, {"D", "E", 0.8}, {"C", "E", 0.4}}, 4000,
                           16);
  const auto r1 = ica_lingam_detailed(ds, {0.05, 3});
  const auto r2 = ica_lingam_detailed(ds, {0.05, 3});
  EXPECT_EQ(r1.graph, r2.graph);
  const auto& b = r1.graph.weights();
  const auto& order = r1.causal_order;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i; j < order.size(); ++j) EXPECT_EQ(b(order[i], order[j]), 0.0);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      EXPECT_EQ(b(i, j) != 0.0, r1.graph.dag().has_edge(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
  const Dag truth(ds.columns(), {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {2, 4}});
  EXPECT_EQ(graph_compare(r1.graph.dag(), truth).shd, 0u);
}

TEST(Hypothesis, MarkovCountMatchesDSeparationEnumeration) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t p = 3 + seed % 4;
    const auto dag = random_dag(p, 0.45, seed);
    std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) reach[a][b] = dag.has_edge(a, b);
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) reach[a][b] = reach[a][b] || (reach[a][k] && reach[k][b]);
    std::size_t expected = 0;
    for (std::size_t v = 0; v < p; ++v) {
      const auto pa = dag.parents(v);
      for (std::size_t u = 0; u < p; ++u) {
        if (u == v || reach[v][u] || dag.has_edge(u, v)) continue;
        ++expected;
        EXPECT_TRUE(ts::d_separated(dag, v, u, pa));
      }
    }
    EXPECT_EQ(markov_tests(dag).size(), expected);
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(200, static_cast<Eigen::Index>(p));
    const FisherZTester t(m, dag.nodes(), 0.05);
    EXPECT_EQ(detail::count_violations(dag, t, nullptr).markov_total, expected);
  }
}

TEST(Hypothesis, TriangleChecksEnumerateDirectedTriangles) {
  Dag d({"X", "Y", "Z", "W"});
  d.add_edge("X", "Y");
  d.add_edge("Y", "Z");
  d.add_edge("X", "Z");
  d.add_edge("Z", "W");
  const auto t = triangle_tests(d);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].x, 0u);
  EXPECT_EQ(t[0].y, 2u);
  EXPECT_TRUE(t[0].cond.empty());
  EXPECT_EQ(t[1].cond, std::vector<std::size_t>{1});
}

TEST(Hypothesis, TrueGraphIsCalibrated) {
  const auto base = default_sem_spec();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto spec = base;
    spec.seed = base.seed + seed;
    const auto d = generate_synthetic(spec, 5000);
    const auto [markov, triangle] = violation_fractions(d.latent, d.truth, 0.05);
    EXPECT_NEAR(markov, 0.05, 0.03) << "seed " << spec.seed;
    (void)triangle;
  }
}

TEST(Hypothesis, ReportFieldsAndPValues) {
  const auto d = generate_synthetic(default_sem_spec(), 3000);
  const auto rep = evaluate_hypothesis_graph(d.latent, d.truth, 0.05, 100, 4, 1);
  EXPECT_EQ(rep.markov_tests, markov_tests(d.truth).size());
  EXPECT_EQ(rep.n_permutations, 100u);
  EXPECT_GE(rep.markov_p, 0.0);
  EXPECT_LE(rep.markov_p, 1.0);
  EXPECT_GE(rep.triangle_p, 0.0);
  EXPECT_LE(rep.triangle_p, 1.0);
  EXPECT_LT(rep.markov_p, 0.05);
  std::size_t violated = 0;
  for (const auto& t : rep.per_test_detail)
    if (t.test.kind == ImpliedTestKind::Markov) {
      violated += t.violated;
      EXPECT_EQ(t.violated, !t.result.independent);
    }
  EXPECT_DOUBLE_EQ(rep.markov_violation_fraction, static_cast<double>(violated) / static_cast<double>(rep.markov_tests));
  const auto again = evaluate_hypothesis_graph(d.latent, d.truth, 0.05, 100, 4, 2);
  EXPECT_EQ(again.markov_p, rep.markov_p);
  EXPECT_EQ(again.triangle_p, rep.triangle_p);
  EXPECT_THROW(evaluate_hypothesis_graph(d.latent, d.truth, 0.05, 99, 4), Error);
}

TEST(Compare, IdentityEmptyAndReversal) {
  const Dag truth({"A", "B", "C", "D", "E", "F"}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  auto same = graph_compare(truth, truth);
  EXPECT_EQ(same.shd, 0u);
  EXPECT_EQ(same.skeleton_precision, 1.0);
  EXPECT_EQ(same.skeleton_recall, 1.0);
  auto empty = graph_compare(Dag(truth.nodes()), truth);
  EXPECT_EQ(empty.shd, 5u);
  EXPECT_EQ(empty.skeleton_recall, 0.0);

  const Dag t3({"A", "B", "C"}, {{0, 1}, {1, 2}});
  const Dag rev({"A", "B", "C"}, {{1, 0}, {1, 2}});
  const auto c = graph_compare(rev, t3);
  EXPECT_EQ(c.shd, 1u);
  EXPECT_EQ(c.orientation_accuracy, 0.5);
  EXPECT_EQ(c.skeleton_f1, 1.0);

  PartiallyDirectedGraph pd({"A", "B", "C"});
  pd.add_undirected(0, 1);
  pd.add_directed(1, 2);
  pd.add_directed(0, 2);
  const auto cp = graph_compare(pd, t3);
  EXPECT_EQ(cp.shd, 2u);
  EXPECT_NEAR(cp.skeleton_precision, 2.0 / 3.0, 1e-15);

  EXPECT_THROW(graph_compare(Dag({"A", "B"}), t3), Error);
}

TEST(Export, DotFormatting) {
  Dag d({"A", "B"});
  d.add_edge("A", "B");
  EXPECT_NE(export_graph(d, GraphFormat::Dot).find("A -> B"), std::string::npos);
  PartiallyDirectedGraph pd({"A", "B"});
  pd.add_undirected(0, 1);
  EXPECT_NE(export_graph(pd, GraphFormat::Dot).find("--"), std::string::npos);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(1, 0) = 0.284;
  EXPECT_NE(export_graph(WeightedDag({"A", "B"}, w), GraphFormat::Dot).find("label=\"0.28\""), std::string::npos);
}

TEST(Export, JsonRoundTrip) {
  const auto dag = random_dag(6, 0.5, 99);
  EXPECT_EQ(dag_from_json(nlohmann::json::parse(export_graph(dag, GraphFormat::Json))), dag);
  PartiallyDirectedGraph pd({"A", "B", "C"});
  pd.add_undirected(0, 1);
  pd.add_directed(2, 1);
  EXPECT_EQ(pdag_from_json(nlohmann::json::parse(export_graph(pd, GraphFormat::Json))), pd);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(1, 0) = 0.284;
  w(2, 1) = -1.0 / 3.0;
  const WeightedDag wd({"A", "B", "C"}, w, 0.05);
  EXPECT_EQ(weighted_dag_from_json(nlohmann::json::parse(export_graph(wd, GraphFormat::Json))), wd);
}
