#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"

namespace cgpa {

struct FastIcaOptions {
  std::size_t max_iters = 1000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct FastIcaResult {
  Eigen::MatrixXd unmixing;  // p x p, applied to centred observations: s = W (x - mean)
  Eigen::VectorXd mean;
  std::size_t iterations = 0;
};

namespace detail {

/// (W W^T)^{-1/2} W
inline Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace detail

/// Fixed-point ICA with symmetric decorrelation and the log-cosh (tanh) contrast.
/// Rows of `data` are samples.
inline FastIcaResult fast_ica(const Eigen::MatrixXd& data, const FastIcaOptions& opt = {}) {
  const auto n = data.rows();
  const auto p = data.cols();
  if (n < 2 || p < 1) fail(ErrorCode::TooFewSamples, "ICA needs data");
  FastIcaResult res;
  res.mean = data.colwise().mean();
  Eigen::MatrixXd xc = data.rowwise() - res.mean.transpose();

  Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    fail(ErrorCode::SingularCovariance, "ICA input covariance is singular");
  Eigen::MatrixXd whiten =
      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd z = whiten * xc.transpose();  // p x n

  Rng rng(opt.seed);
  Eigen::MatrixXd w(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) w(i, j) = rng.normal();
  w = detail::symmetric_decorrelation(w);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    Eigen::MatrixXd g = (w * z).array().tanh().matrix();
    Eigen::VectorXd gprime_mean = (1.0 - g.array().square()).rowwise().mean();
    Eigen::MatrixXd w_new = g * z.transpose() * inv_n - gprime_mean.asDiagonal() * w;
    w_new = detail::symmetric_decorrelation(w_new);
    const double lim = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(w_new);
    if (lim < opt.tol) {
      res.unmixing = w * whiten;
      res.iterations = it;
      return res;
    }
  }
  throw Error(ErrorCode::IcaNonConvergence,
              "IcaNonConvergence: no convergence within " + std::to_string(opt.max_iters) + " iterations");
}

/// Minimum-cost perfect assignment (Hungarian / Kuhn-Munkres, O(n^3)).
/// Returns assignment[row] = column.
inline std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace cgpa
