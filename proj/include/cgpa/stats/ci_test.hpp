#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/data/dataset.hpp"

namespace cgpa {

/// Standard normal upper tail P(Z > z).
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

struct CiResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
  std::vector<std::string> cond_set;
};

/// Fisher z test of zero (partial) correlation: sqrt(n - |Z| - 3) * atanh(r),
/// two-sided normal p-value. Independence is accepted when p > alpha.
inline CiResult fisher_z_test(double r, std::size_t n, std::size_t z_dim, double alpha) {
  if (n < z_dim + 4)
    fail(ErrorCode::TooFewSamples, "n=" + std::to_string(n) + " with |Z|=" + std::to_string(z_dim));
  if (!(std::abs(r) < 1.0)) {
    if (std::abs(r) > 1.0 + 1e-12 || std::isnan(r)) fail(ErrorCode::InvalidArgument, "correlation outside [-1,1]");
    // |r| == 1: infinitely strong evidence of dependence.
    return {r > 0 ? INFINITY : -INFINITY, 0.0, false, {}};
  }
  CiResult out;
  out.statistic = std::sqrt(static_cast<double>(n - z_dim - 3)) * std::atanh(r);
  out.p_value = std::min(1.0, 2.0 * normal_upper_tail(std::abs(out.statistic)));
  out.independent = out.p_value > alpha;
  return out;
}

/// Pearson correlation matrix of the columns of `data`.
inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data) {
  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < sd.size(); ++i)
    if (!(sd(i) > 0)) sd(i) = 1.0;
  Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  corr.diagonal().setOnes();
  return corr;
}

/// Partial correlation of i and j given `cond`, read off the inverse of the
/// correlation submatrix over {i, j} ∪ cond.
inline double partial_correlation_from(const Eigen::MatrixXd& corr, std::size_t i, std::size_t j,
                                       const std::vector<std::size_t>& cond) {
  if (cond.empty()) return std::clamp(corr(i, j), -1.0, 1.0);
  const auto k = static_cast<Eigen::Index>(cond.size() + 2);
  std::vector<std::size_t> idx{i, j};
  idx.insert(idx.end(), cond.begin(), cond.end());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = corr(idx[a], idx[b]);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
  const auto d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff()))
    fail(ErrorCode::SingularCovariance, "conditioning set covariance is singular");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(k, 2);
  rhs(0, 0) = 1.0;
  rhs(1, 1) = 1.0;
  Eigen::MatrixXd inv2 = ldlt.solve(rhs);  // first two columns of the inverse
  const double pij = inv2(1, 0), pii = inv2(0, 0), pjj = inv2(1, 1);
  return std::clamp(-pij / std::sqrt(pii * pjj), -1.0, 1.0);
}

/// Partial correlation between two dataset columns given a conditioning set.
inline double partial_correlation(const NumericDataset& ds, std::string_view i, std::string_view j,
                                  const std::vector<std::string>& cond) {
  if (cond.size() + 3 > ds.rows()) fail(ErrorCode::TooFewSamples, "conditioning set too large for n");
  std::vector<std::size_t> ci;
  for (const auto& c : cond) ci.push_back(ds.column_index(c));
  const auto ii = ds.column_index(i), jj = ds.column_index(j);
  std::vector<std::string> names;
  std::vector<std::size_t> cols{ii, jj};
  cols.insert(cols.end(), ci.begin(), ci.end());
  Eigen::MatrixXd sub(ds.matrix().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sub.col(c) = ds.matrix().col(cols[c]);
  Eigen::MatrixXd corr = correlation_matrix(sub);
  std::vector<std::size_t> cidx;
  for (std::size_t c = 2; c < cols.size(); ++c) cidx.push_back(c);
  return partial_correlation_from(corr, 0, 1, cidx);
}

/// Fisher-z conditional-independence tester over a fixed dataset.
/// The correlation matrix is computed once and shared by every query.
class FisherZTester {
 public:
  FisherZTester(const Eigen::MatrixXd& data, std::vector<std::string> names, double alpha)
      : corr_(correlation_matrix(data)),
        n_(static_cast<std::size_t>(data.rows())),
        names_(std::move(names)),
        alpha_(alpha) {}

  explicit FisherZTester(const NumericDataset& ds, double alpha)
      : FisherZTester(ds.matrix(), ds.columns(), alpha) {}

  CiResult test(std::size_t i, std::size_t j, const std::vector<std::size_t>& cond) const {
    const double r = partial_correlation_from(corr_, i, j, cond);
    auto out = fisher_z_test(r, n_, cond.size(), alpha_);
    for (auto c : cond) out.cond_set.push_back(names_[c]);
    return out;
  }

  std::size_t samples() const { return n_; }
  double alpha() const { return alpha_; }
  const Eigen::MatrixXd& correlation() const { return corr_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  Eigen::MatrixXd corr_;
  std::size_t n_;
  std::vector<std::string> names_;
  double alpha_;
};

inline nlohmann::json to_json(const CiResult& r) {
  return {{"statistic", r.statistic}, {"p_value", r.p_value}, {"independent", r.independent}, {"cond_set", r.cond_set}};
}

}  // namespace cgpa
