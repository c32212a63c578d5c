#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"

namespace cgpa {

enum class PenaltyKind { None, Ridge, Lasso, ElasticNet };

/// Regularisation of the linear family.
///
/// none / ridge minimise   sum_i s_i (y_i - b - x_i.w)^2 + lambda ||w||^2
/// lasso / elastic net     (1 / (2 sum s)) sum_i s_i (y_i - b - x_i.w)^2
///                           + lambda (mix ||w||_1 + (1 - mix)/2 ||w||^2)
/// with lasso = elastic net at mix = 1. The intercept b is never penalised.
struct Penalty {
  PenaltyKind kind = PenaltyKind::None;
  double lambda = 0.0;
  double mix = 1.0;

  static Penalty none() { return {PenaltyKind::None, 0.0, 0.0}; }
  static Penalty ridge(double lambda) { return {PenaltyKind::Ridge, lambda, 0.0}; }
  static Penalty lasso(double lambda) { return {PenaltyKind::Lasso, lambda, 1.0}; }
  static Penalty elastic_net(double lambda, double mix) { return {PenaltyKind::ElasticNet, lambda, mix}; }
};

inline std::string_view to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Ridge: return "ridge";
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::ElasticNet: return "elastic_net";
  }
  return "none";
}

inline PenaltyKind penalty_kind_from_string(std::string_view s) {
  if (s == "none") return PenaltyKind::None;
  if (s == "ridge") return PenaltyKind::Ridge;
  if (s == "lasso") return PenaltyKind::Lasso;
  if (s == "elastic_net") return PenaltyKind::ElasticNet;
  fail(ErrorCode::Parse, "unknown penalty '" + std::string(s) + "'");
}

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  Penalty penalty;
  std::vector<std::size_t> excluded;  // zero-weight features under an L1 penalty
  std::size_t sweeps = 0;             // coordinate-descent sweeps used (0 for closed form)

  double predict_one(const Eigen::VectorXd& x) const { return weights.dot(x) + intercept; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    return (X * weights).array() + intercept;
  }
};

struct CoordinateDescentOptions {
  double tol = 1e-7;  // on the largest coordinate change in a sweep
  std::size_t max_sweeps = 10000;
};

namespace detail {

inline Eigen::VectorXd normalized_weights(std::size_t n, const Eigen::VectorXd& sample_weights) {
  if (sample_weights.size() == 0) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  if (static_cast<std::size_t>(sample_weights.size()) != n)
    fail(ErrorCode::DimensionMismatch, "sample weight count differs from row count");
  if ((sample_weights.array() < 0).any()) fail(ErrorCode::InvalidArgument, "negative sample weight");
  const double total = sample_weights.sum();
  if (!(total > 0)) fail(ErrorCode::InvalidArgument, "sample weights sum to zero");
  return sample_weights / total;
}

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace detail

/// Fits OLS / ridge by the normal equations and lasso / elastic net by cyclic
/// coordinate descent. `sample_weights` may be empty (uniform).
inline LinearModel fit_linear_family(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Penalty& penalty,
                                     const Eigen::VectorXd& sample_weights = {},
                                     const CoordinateDescentOptions& cd = {}) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = X.cols();
  if (n == 0) fail(ErrorCode::EmptyData, "no training rows");
  if (static_cast<std::size_t>(y.size()) != n) fail(ErrorCode::DimensionMismatch, "X and y row counts differ");
  if (penalty.lambda < 0) fail(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (penalty.mix < 0 || penalty.mix > 1) fail(ErrorCode::InvalidArgument, "mix must lie in [0,1]");

  const Eigen::VectorXd s = detail::normalized_weights(n, sample_weights);
  const Eigen::RowVectorXd x_mean = s.transpose() * X;
  const double y_mean = s.dot(y);
  const Eigen::MatrixXd xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel m;
  m.penalty = penalty;

  if (penalty.kind == PenaltyKind::None || penalty.kind == PenaltyKind::Ridge) {
    // Unnormalised weights: scale back so the loss is sum_i s_i r_i^2 with
    // s_i summing to n when no weights are given.
    const double scale = sample_weights.size() == 0 ? static_cast<double>(n) : sample_weights.sum();
    Eigen::MatrixXd a = xc.transpose() * (s * scale).asDiagonal() * xc;
    Eigen::VectorXd rhs = xc.transpose() * (s * scale).cwiseProduct(yc);
    const double lambda = penalty.kind == PenaltyKind::Ridge ? penalty.lambda : 0.0;
    a.diagonal().array() += lambda;
    if (p == 0) {
      m.weights = Eigen::VectorXd(0);
    } else {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      const auto d = ldlt.vectorD().cwiseAbs();
      if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-10 * std::max(1.0, d.maxCoeff()))
        fail(ErrorCode::SingularSystem, "normal equations are singular (collinear features?)");
      m.weights = ldlt.solve(rhs);
      // One step of iterative refinement.
      m.weights += ldlt.solve(rhs - a * m.weights);
    }
    m.intercept = y_mean - x_mean.dot(m.weights);
    return m;
  }

  const double mix = penalty.kind == PenaltyKind::Lasso ? 1.0 : penalty.mix;
  const double l1 = penalty.lambda * mix;
  const double l2 = penalty.lambda * (1.0 - mix);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z(p);
  for (Eigen::Index j = 0; j < p; ++j) z(j) = s.dot(xc.col(j).cwiseAbs2());
  Eigen::VectorXd r = yc;  // residual
  bool converged = false;
  for (std::size_t sweep = 1; sweep <= cd.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (z(j) <= 0.0) {
        w(j) = 0.0;
        continue;
      }
      const double old = w(j);
      const double rho = s.dot(xc.col(j).cwiseProduct(r)) + z(j) * old;
      const double updated = detail::soft_threshold(rho, l1) / (z(j) + l2);
      const double delta = updated - old;
      if (delta != 0.0) {
        r -= delta * xc.col(j);
        w(j) = updated;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    m.sweeps = sweep;
    if (max_delta < cd.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorCode::NonConvergence,
                "NonConvergence: coordinate descent did not converge in " + std::to_string(cd.max_sweeps) + " sweeps");
  m.weights = w;
  m.intercept = y_mean - x_mean.dot(w);
  if (mix > 0)
    for (Eigen::Index j = 0; j < p; ++j)
      if (w(j) == 0.0) m.excluded.push_back(static_cast<std::size_t>(j));
  return m;
}

inline nlohmann::json to_json(const Penalty& p) {
  return {{"kind", to_string(p.kind)}, {"lambda", p.lambda}, {"mix", p.mix}};
}

inline Penalty penalty_from_json(const nlohmann::json& j) {
  return {penalty_kind_from_string(j.at("kind").get<std::string>()), j.at("lambda").get<double>(),
          j.at("mix").get<double>()};
}

}  // namespace cgpa
