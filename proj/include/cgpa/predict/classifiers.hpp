#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/predict/linear.hpp"
#include "cgpa/predict/tree.hpp"

namespace cgpa {

struct LogisticConfig {
  double l2 = 1e-3;         // coefficient of (l2/2) ||W||^2 added to the mean cross-entropy
  double tol = 1e-12;       // loss change
  double grad_tol = 1e-7;   // infinity norm of the gradient
  std::size_t max_iters = 200;  // Newton steps
};

/// Multinomial logistic regression: P(c | x) = softmax(W x + b)_c.
struct LogisticModel {
  Eigen::MatrixXd W;  // classes x features
  Eigen::VectorXd b;
  double l2 = 0.0;
  std::size_t iterations = 0;

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::VectorXd>& x) const { return W * x + b; }

  double predict_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::Index best = 0;
    scores(x).maxCoeff(&best);
    return static_cast<double>(best);
  }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_one(X.row(r).transpose());
    return out;
  }
};

/// One-vs-rest ridge regression on +/-1 targets; predicts the highest score.
struct RidgeClassifierModel {
  Eigen::MatrixXd W;  // classes x features
  Eigen::VectorXd b;
  double lambda = 1.0;

  double predict_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::Index best = 0;
    (W * x + b).maxCoeff(&best);
    return static_cast<double>(best);
  }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_one(X.row(r).transpose());
    return out;
  }
};

/// k nearest neighbours by Euclidean distance. Neighbours are taken in order of
/// (distance, training index); the vote goes to the most frequent label, ties
/// to the lowest label.
struct KnnModel {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::size_t k = 5;
  std::size_t n_classes = 0;

  double predict_one(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {(X.row(static_cast<Eigen::Index>(i)).transpose() - x).squaredNorm(), i};
    const auto kk = std::min(k, n);
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(kk), d.end());
    std::vector<std::size_t> votes(n_classes, 0);
    for (std::size_t i = 0; i < kk; ++i) ++votes[static_cast<std::size_t>(y(static_cast<Eigen::Index>(d[i].second)))];
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c)
      if (votes[c] > votes[best]) best = c;
    return static_cast<double>(best);
  }
  Eigen::VectorXd predict(const Eigen::MatrixXd& Xq) const {
    Eigen::VectorXd out(Xq.rows());
    for (Eigen::Index r = 0; r < Xq.rows(); ++r) out(r) = predict_one(Xq.row(r).transpose());
    return out;
  }
};

namespace detail {

inline std::size_t require_classes(const Eigen::VectorXd& y, std::size_t n_classes) {
  const auto k = std::max(n_classes, class_count(y));
  std::vector<char> present(k, 0);
  for (Eigen::Index i = 0; i < y.size(); ++i) present[static_cast<std::size_t>(y(i))] = 1;
  if (std::count(present.begin(), present.end(), 1) < 2)
    fail(ErrorCode::SingleClass, "training labels contain fewer than two classes");
  return k;
}

/// Mean cross-entropy + (l2/2)||W||^2 and its gradient.
inline double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& W,
                            const Eigen::VectorXd& b, double l2, Eigen::MatrixXd* gW, Eigen::VectorXd* gb) {
  const auto n = X.rows();
  Eigen::MatrixXd z = X * W.transpose();
  z.rowwise() += b.transpose();
  double loss = 0.0;
  Eigen::MatrixXd P(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = z.row(i).maxCoeff();
    Eigen::RowVectorXd e = (z.row(i).array() - m).exp();
    const double s = e.sum();
    P.row(i) = e / s;
    loss -= z(i, static_cast<Eigen::Index>(y(i))) - m - std::log(s);
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * l2 * W.squaredNorm();
  if (gW) {
    for (Eigen::Index i = 0; i < n; ++i) P(i, static_cast<Eigen::Index>(y(i))) -= 1.0;
    *gW = P.transpose() * X / static_cast<double>(n) + l2 * W;
    *gb = P.colwise().sum().transpose() / static_cast<double>(n);
  }
  return loss;
}

}  // namespace detail

/// Damped Newton descent on the penalised cross-entropy: exact softmax Hessian,
/// Armijo backtracking along the Newton direction (falling back to the
/// negative gradient if the system cannot be solved). Stops when the loss
/// change or the gradient infinity-norm is below tolerance.
inline LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LogisticConfig& cfg = {},
                                  std::size_t n_classes = 0) {
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "no training rows");
  const auto k = static_cast<Eigen::Index>(detail::require_classes(y, n_classes));
  const auto p = X.cols();
  const auto n = X.rows();
  const auto q = p + 1;  // weights plus intercept per class
  Eigen::MatrixXd Xa(n, q);
  Xa.leftCols(p) = X;
  Xa.col(p).setOnes();

  LogisticModel m;
  m.l2 = cfg.l2;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd gW;
  Eigen::VectorXd gb;
  double loss = detail::logistic_loss(X, y, W, b, cfg.l2, &gW, &gb);
  for (std::size_t it = 1;; ++it) {
    const double ginf = std::max(gW.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff());
    if (ginf < cfg.grad_tol) break;
    if (it > cfg.max_iters)
      throw Error(ErrorCode::NonConvergence, "NonConvergence: logistic regression did not converge");

    // Class probabilities at the current point.
    Eigen::MatrixXd P = (X * W.transpose()).rowwise() + b.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = P.row(i).maxCoeff();
      P.row(i) = (P.row(i).array() - mx).exp();
      P.row(i) /= P.row(i).sum();
    }
    Eigen::VectorXd g(k * q);
    for (Eigen::Index c = 0; c < k; ++c) {
      g.segment(c * q, p) = gW.row(c).transpose();
      g(c * q + p) = gb(c);
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k * q, k * q);
    for (Eigen::Index c = 0; c < k; ++c) {
      for (Eigen::Index d = c; d < k; ++d) {
        const Eigen::VectorXd w =
            (P.col(c).array() * ((c == d ? 1.0 : 0.0) - P.col(d).array())).matrix() / static_cast<double>(n);
        const Eigen::MatrixXd block = Xa.transpose() * w.asDiagonal() * Xa;
        H.block(c * q, d * q, q, q) = block;
        if (d != c) H.block(d * q, c * q, q, q) = block.transpose();
      }
      H.block(c * q, c * q, p, p).diagonal().array() += cfg.l2;
    }
    // Shifting every intercept by the same constant leaves the loss unchanged,
    // so H is singular along that direction; a tiny shift keeps it solvable.
    H.diagonal().array() += 1e-10;
    Eigen::VectorXd dir = -H.ldlt().solve(g);
    double slope = g.dot(dir);
    if (!dir.allFinite() || slope >= 0.0) {
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0, ln = loss;
    Eigen::MatrixXd Wn = W;
    Eigen::VectorXd bn = b;
    while (step > 1e-16) {
      for (Eigen::Index c = 0; c < k; ++c) {
        Wn.row(c) = W.row(c) + step * dir.segment(c * q, p).transpose();
        bn(c) = b(c) + step * dir(c * q + p);
      }
      ln = detail::logistic_loss(X, y, Wn, bn, cfg.l2, nullptr, nullptr);
      if (ln <= loss + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    const double change = loss - ln;
    if (change < 0.0) break;  // no descent possible at machine precision
    W = std::move(Wn);
    b = std::move(bn);
    loss = detail::logistic_loss(X, y, W, b, cfg.l2, &gW, &gb);
    m.iterations = it;
    if (change < cfg.tol) break;
  }
  m.W = std::move(W);
  m.b = std::move(b);
  return m;
}

inline RidgeClassifierModel fit_ridge_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda = 1.0,
                                                 std::size_t n_classes = 0) {
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "no training rows");
  const auto k = static_cast<Eigen::Index>(detail::require_classes(y, n_classes));
  RidgeClassifierModel m;
  m.lambda = lambda;
  m.W.resize(k, X.cols());
  m.b.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd t(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) t(i) = y(i) == static_cast<double>(c) ? 1.0 : -1.0;
    auto lm = fit_linear_family(X, t, Penalty::ridge(lambda));
    m.W.row(c) = lm.weights.transpose();
    m.b(c) = lm.intercept;
  }
  return m;
}

inline KnnModel fit_knn(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k, std::size_t n_classes = 0) {
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "no training rows");
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
  const auto nc = detail::require_classes(y, n_classes);
  return {X, y, k, nc};
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = r ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace cgpa
