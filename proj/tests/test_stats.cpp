#include <cmath>

#include <gtest/gtest.h>

#include "cgpa/data/default_sem.hpp"
#include "cgpa/data/sem.hpp"
#include "cgpa/stats/ci_test.hpp"
#include "cgpa/stats/describe.hpp"
#include "support.hpp"

using namespace cgpa;
namespace ts = testing_support;

namespace {

NumericDataset gaussian_columns(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) m(r, c) = rng.normal();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < p; ++c) names.push_back("V" + std::to_string(c));
  return NumericDataset(m, names);
}

double recursive_partial(const Eigen::MatrixXd& r, std::size_t i, std::size_t j, std::vector<std::size_t> z) {
  if (z.empty()) return r(i, j);
  const auto k = z.back();
  z.pop_back();
  const double rij = recursive_partial(r, i, j, z);
  const double rik = recursive_partial(r, i, k, z);
  const double rjk = recursive_partial(r, j, k, z);
  return (rij - rik * rjk) / std::sqrt((1 - rik * rik) * (1 - rjk * rjk));
}

Eigen::MatrixXd naive_corr(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd r(m.cols(), m.cols());
  for (Eigen::Index i = 0; i < m.cols(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = ts::pearson(m.col(i), m.col(j));
  return r;
}

}  // namespace

TEST(Describe, ConstantColumn) {
  const NumericDataset ds(Eigen::MatrixXd::Constant(5, 1, 3.0), {"c"});
  const auto s = describe(ds).at(0);
  EXPECT_EQ(s.count, 5u);
  EXPECT_EQ(s.unique, 1u);
  EXPECT_EQ(s.sd, 0.0);
  EXPECT_EQ(s.mode, 3.0);
}

TEST(Describe, SmallColumn) {
  Eigen::MatrixXd m(4, 1);
  m << 1, 2, 2, 3;
  const auto s = describe(NumericDataset(m, {"c"})).at(0);
  EXPECT_EQ(s.mode, 2.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_EQ(s.unique, 3u);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  EXPECT_NEAR(s.sd, std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Describe, ModeTieGoesToFirstSeen) {
  Eigen::MatrixXd m(4, 1);
  m << 5, 1, 1, 5;
  EXPECT_EQ(describe(NumericDataset(m, {"c"})).at(0).mode, 5.0);
}

TEST(Describe, MatchesIndependentRecomputation) {
  const auto schema = default_schema();
  const auto d = generate_synthetic(default_sem_spec(), 800, &schema);
  const auto ds = encode_and_scale(d.records, schema, default_scaling_policy(schema));
  const auto out = describe(ds);
  ASSERT_EQ(out.size(), ds.cols());
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    std::vector<double> v(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) v[r] = ds.matrix()(r, c);
    long double sum = 0;
    for (auto x : v) sum += x;
    const double mean = static_cast<double>(sum / v.size());
    long double ss = 0;
    for (auto x : v) ss += (x - mean) * (x - mean);
    std::map<double, int> counts;
    for (auto x : v) ++counts[x];
    EXPECT_NEAR(out[c].mean, mean, 1e-12);
    EXPECT_NEAR(out[c].sd, std::sqrt(static_cast<double>(ss / (v.size() - 1))), 1e-12);
    EXPECT_EQ(out[c].unique, counts.size());
    EXPECT_EQ(out[c].min, *std::min_element(v.begin(), v.end()));
    EXPECT_EQ(out[c].max, *std::max_element(v.begin(), v.end()));
    int best = 0;
    for (auto& [k, n] : counts) best = std::max(best, n);
    EXPECT_EQ(counts[out[c].mode], best);
  }
}

TEST(Crosstab, SingleLevelTable) {
  const auto schema = default_schema();
  auto recs = generate_synthetic(default_sem_spec(), 10, &schema).records;
  for (auto& r : recs) {
    r.values["G"] = std::string("Female");
    r.values["MI"] = std::string("No");
  }
  const auto rep = crosstab(encode_and_scale(recs, schema, {}), "G", "MI");
  ASSERT_EQ(rep.cells.size(), 1u);
  ASSERT_EQ(rep.cells[0].size(), 1u);
  EXPECT_EQ(rep.cells[0][0].count, 10u);
  EXPECT_DOUBLE_EQ(rep.cells[0][0].total_pct, 100.0);
  EXPECT_DOUBLE_EQ(rep.cells[0][0].row_pct, 100.0);
  EXPECT_DOUBLE_EQ(rep.cells[0][0].col_pct, 100.0);
}

TEST(Crosstab, PercentagesSumAndCountsMatch) {
  const auto schema = default_schema();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto spec = default_sem_spec();
    spec.seed = seed;
    const auto d = generate_synthetic(spec, 600, &schema);
    const auto ds = encode_and_scale(d.records, schema, default_scaling_policy(schema));
    for (auto [a, b] : {std::pair{"HS", "SH"}, std::pair{"AC", "SCI"}, std::pair{"DI", "G"}}) {
      const auto rep = crosstab(ds, a, b);
      std::size_t total = 0;
      double total_pct = 0;
      for (std::size_t i = 0; i < rep.cells.size(); ++i) {
        double row = 0;
        for (std::size_t j = 0; j < rep.cells[i].size(); ++j) {
          const auto& cell = rep.cells[i][j];
          std::size_t direct = 0;
          for (const auto& r : d.records) direct += to_text(r.at(a)) == rep.row_levels[i] && to_text(r.at(b)) == rep.col_levels[j];
          EXPECT_EQ(cell.count, direct);
          total += cell.count;
          total_pct += cell.total_pct;
          row += cell.row_pct;
        }
        EXPECT_NEAR(row, 100.0, 1e-9);
      }
      for (std::size_t j = 0; j < rep.col_levels.size(); ++j) {
        double col = 0;
        for (std::size_t i = 0; i < rep.cells.size(); ++i) col += rep.cells[i][j].col_pct;
        EXPECT_NEAR(col, 100.0, 1e-9);
      }
      EXPECT_EQ(total, 600u);
      EXPECT_NEAR(total_pct, 100.0, 1e-9);
    }
  }
}

TEST(Crosstab, RejectsContinuousFactor) {
  const auto schema = default_schema();
  const auto d = generate_synthetic(default_sem_spec(), 20, &schema);
  const auto ds = encode_and_scale(d.records, schema, {});
  try {
    crosstab(ds, "SSC", "G");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ContinuousFactor);
  }
}

TEST(PartialCorrelation, PerfectCorrelationAndSymmetry) {
  Eigen::MatrixXd m(50, 3);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.normal();
    m.row(i) << x, 2 * x + 1, rng.normal();
  }
  const NumericDataset ds(m, {"a", "b", "c"});
  EXPECT_NEAR(partial_correlation(ds, "a", "b", {}), 1.0, 1e-12);
  EXPECT_EQ(partial_correlation(ds, "a", "c", {}), partial_correlation(ds, "c", "a", {}));
  EXPECT_NEAR(partial_correlation(ds, "a", "c", {}), ts::pearson(m.col(0), m.col(2)), 1e-12);
}

TEST(PartialCorrelation, ChainIsScreenedOff) {
  SemSpec spec;
  spec.nodes = {"X", "Y", "Z"};
  spec.edges = {{"X", "Y", 0.9}, {"Y", "Z", 0.9}};
  spec.seed = 77;
  const auto d = generate_synthetic(spec, 5000);
  EXPECT_GT(std::abs(partial_correlation(d.latent, "X", "Z", {})), 0.3);
  EXPECT_LT(std::abs(partial_correlation(d.latent, "X", "Z", {"Y"})), 0.05);
}

TEST(PartialCorrelation, MatchesRecursiveFormula) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(300, 5);
    for (int r = 0; r < 300; ++r) {
      const double h = rng.normal();
      for (int c = 0; c < 5; ++c) m(r, c) = rng.normal() + (0.3 + 0.2 * c) * h;
    }
    const NumericDataset ds(m, {"a", "b", "c", "d", "e"});
    const auto corr = naive_corr(m);
    EXPECT_NEAR(partial_correlation(ds, "a", "b", {"c"}), recursive_partial(corr, 0, 1, {2}), 1e-10);
    EXPECT_NEAR(partial_correlation(ds, "a", "e", {"b", "d"}), recursive_partial(corr, 0, 4, {1, 3}), 1e-10);
    EXPECT_NEAR(partial_correlation(ds, "b", "c", {"a", "d", "e"}), recursive_partial(corr, 1, 2, {0, 3, 4}), 1e-10);
    EXPECT_NEAR(partial_correlation(ds, "a", "b", {"c"}), partial_correlation(ds, "b", "a", {"c"}), 1e-14);
  }
}

TEST(PartialCorrelation, SingularConditioningSetFails) {
  Eigen::MatrixXd m(40, 4);
  Rng rng(3);
  for (int r = 0; r < 40; ++r) {
    const double z = rng.normal();
    m.row(r) << rng.normal(), rng.normal(), z, 2 * z;
  }
  const NumericDataset ds(m, {"a", "b", "c", "d"});
  try {
    partial_correlation(ds, "a", "b", {"c", "d"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularCovariance);
  }
}

TEST(FisherZ, ZeroCorrelation) {
  const auto r = fisher_z_test(0.0, 100, 0, 0.05);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_TRUE(r.independent);
}

TEST(FisherZ, StatisticAndTail) {
  const auto r = fisher_z_test(0.8, 1000, 0, 0.05);
  EXPECT_NEAR(r.statistic, std::sqrt(997.0) * std::atanh(0.8), 1e-12);
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_FALSE(r.independent);
  const auto s = fisher_z_test(0.1, 400, 2, 0.05);
  const double z = std::sqrt(395.0) * std::atanh(0.1);
  EXPECT_NEAR(s.statistic, z, 1e-12);
  EXPECT_NEAR(s.p_value, std::erfc(z / std::sqrt(2.0)), 1e-14);
  EXPECT_EQ(s.independent, s.p_value > 0.05);
}

TEST(FisherZ, TooFewSamples) {
  try {
    fisher_z_test(0.1, 4, 1, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(FisherZ, AgreesWithPermutationTest) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed + 40);
    const std::size_t n = 500;
    Eigen::VectorXd x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i) = rng.normal();
      y(i) = 0.08 * x(i) + rng.normal();
    }
    const double r = ts::pearson(x, y);
    std::vector<double> yv(y.data(), y.data() + n);
    int extreme = 0;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
      rng.shuffle(yv);
      const double rp = ts::pearson(x, Eigen::Map<Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(n)));
      extreme += std::abs(rp) >= std::abs(r);
    }
    const double p_perm = static_cast<double>(extreme) / draws;
    EXPECT_NEAR(fisher_z_test(r, n, 0, 0.05).p_value, p_perm, 0.05) << "seed " << seed;
  }
}

TEST(FisherZ, CalibratedOnIndependentColumns) {
  const double alpha = 0.05;
  int rejections = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto ds = gaussian_columns(200, 3, 1000 + static_cast<std::uint64_t>(t));
    const FisherZTester tester(ds, alpha);
    rejections += !tester.test(0, 1, {2}).independent;
  }
  EXPECT_NEAR(rejections / 1000.0, alpha, 0.02);
}

TEST(FisherZ, MonotoneInAbsoluteCorrelation) {
  double prev = 2.0;
  for (int k = 0; k < 100; ++k) {
    const double r = k / 100.0;
    const double p = fisher_z_test(r, 300, 1, 0.05).p_value;
    EXPECT_LE(p, prev);
    EXPECT_DOUBLE_EQ(p, fisher_z_test(-r, 300, 1, 0.05).p_value);
    prev = p;
  }
}

TEST(FisherZ, TesterUsesPartialCorrelation) {
  const auto ds = gaussian_columns(250, 4, 8);
  const FisherZTester t(ds, 0.05);
  const auto res = t.test(0, 1, {2, 3});
  const double pc = partial_correlation(ds, "V0", "V1", {"V2", "V3"});
  EXPECT_NEAR(res.statistic, std::sqrt(250.0 - 2 - 3) * std::atanh(pc), 1e-10);
  EXPECT_EQ(res.cond_set, (std::vector<std::string>{"V2", "V3"}));
}
