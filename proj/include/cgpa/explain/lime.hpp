#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/explain/shapley.hpp"
#include "cgpa/predict/linear.hpp"

namespace cgpa {

/// How a feature may be perturbed: Gaussian noise of `sd` for continuous
/// features, or resampling among `values` (model units) for encoded ones.
struct FeatureDomain {
  std::string name;
  bool categorical = false;
  double sd = 1.0;
  std::vector<double> values;
};

using FeatureSpace = std::vector<FeatureDomain>;

/// Domains for the given columns of a dataset: encoded factors use their
/// scaled level codes, continuous ones use the sample sd and a 9-point grid
/// over the observed range.
inline FeatureSpace feature_space(const NumericDataset& ds, const std::vector<std::string>& columns) {
  FeatureSpace fs;
  for (const auto& name : columns) {
    const auto c = ds.column_index(name);
    const Eigen::VectorXd col = ds.matrix().col(static_cast<Eigen::Index>(c));
    FeatureDomain d;
    d.name = name;
    const double mean = col.mean();
    d.sd = col.size() > 1 ? std::sqrt((col.array() - mean).square().sum() / static_cast<double>(col.size() - 1)) : 0.0;
    if (ds.is_categorical(name)) {
      d.categorical = true;
      const auto& levels = ds.encoding_map().at(name);
      for (std::size_t l = 0; l < levels.size(); ++l) d.values.push_back(ds.scaling()[c].apply(static_cast<double>(l)));
    } else {
      const double lo = col.minCoeff(), hi = col.maxCoeff();
      for (int i = 0; i <= 8; ++i) d.values.push_back(lo + (hi - lo) * i / 8.0);
    }
    fs.push_back(std::move(d));
  }
  return fs;
}

struct LimeConfig {
  std::size_t n_perturbations = 500;
  double kernel_width = 0.0;  // 0 selects 0.75 sqrt(p)
  std::size_t n_rules = 10;
  double lambda = 0.01;  // lasso strength relative to the weighted sd of the black-box outputs
  std::uint64_t seed = 0;
};

struct FeatureRule {
  std::string feature;
  std::size_t index = 0;
  double lo = -std::numeric_limits<double>::infinity();  // exclusive
  double hi = std::numeric_limits<double>::infinity();   // inclusive
  double weight = 0.0;
  std::string text;
};

struct LocalExplanation {
  std::vector<FeatureRule> feature_rules;
  double intercept = 0.0;
  double local_fidelity_r2 = 0.0;
  double prediction = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double kernel_width = 0.0;
  double lambda_used = 0.0;
  Eigen::VectorXd surrogate_weights;  // per unit of each feature in model space
  Eigen::MatrixXd samples;            // the perturbation neighbourhood
  Eigen::VectorXd sample_weights;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Local surrogate around x: perturb, weight by exp(-d^2 / width^2) with d the
/// sd-scaled distance to x, fit a weighted lasso, keep the largest weights and
/// phrase each as the perturbation-quartile interval containing x.
inline LocalExplanation lime_explain(const ModelFn& f, const Eigen::VectorXd& x, const FeatureSpace& space,
                                     const LimeConfig& cfg = {}) {
  const auto p = static_cast<std::size_t>(x.size());
  if (space.size() != p) fail(ErrorCode::DimensionMismatch, "feature space width differs from x");
  if (cfg.n_perturbations < 50) fail(ErrorCode::InvalidArgument, "need at least 50 perturbations");
  const auto n = cfg.n_perturbations;
  Rng rng(cfg.seed);
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const auto& d = space[j];
      double v = x(static_cast<Eigen::Index>(j));
      if (d.categorical && !d.values.empty()) v = d.values[static_cast<std::size_t>(rng.below(d.values.size()))];
      else if (!d.categorical) v += d.sd * rng.normal();
      Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  // The first row is x itself so the neighbourhood always covers the instance.
  Z.row(0) = x.transpose();
  bool varied = false;
  for (Eigen::Index i = 1; i < Z.rows() && !varied; ++i) varied = (Z.row(i) - Z.row(0)).cwiseAbs().maxCoeff() > 0;
  if (!varied) fail(ErrorCode::DegenerateNeighborhood, "all perturbations are identical");

  LocalExplanation out;
  out.kernel_width = cfg.kernel_width > 0 ? cfg.kernel_width : 0.75 * std::sqrt(static_cast<double>(p));
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n)), w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = Z(i, static_cast<Eigen::Index>(j)) - x(static_cast<Eigen::Index>(j));
      const double s = space[j].sd > 0 ? space[j].sd : 1.0;
      d2 += space[j].categorical ? (diff != 0.0 ? 1.0 : 0.0) : (diff / s) * (diff / s);
    }
    w(i) = std::exp(-d2 / (out.kernel_width * out.kernel_width));
    yv(i) = f(Z.row(i).transpose());
  }
  out.prediction = yv(0);
  out.range_lo = yv.minCoeff();
  out.range_hi = yv.maxCoeff();

  // Standardise columns so the lasso treats features alike.
  const double wsum = w.sum();
  const Eigen::RowVectorXd mean = (w.transpose() * Z) / wsum;
  Eigen::RowVectorXd sd(Z.cols());
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double v = w.dot((Z.col(j).array() - mean(j)).square().matrix()) / wsum;
    sd(j) = v > 0 ? std::sqrt(v) : 1.0;
  }
  const Eigen::MatrixXd Zs = (Z.rowwise() - mean).array().rowwise() / sd.array();
  const double ymean = w.dot(yv) / wsum;
  const double ysd = std::sqrt(w.dot((yv.array() - ymean).square().matrix()) / wsum);
  out.lambda_used = cfg.lambda * ysd;
  const auto lm = fit_linear_family(Zs, yv, Penalty::lasso(out.lambda_used), w);
  out.surrogate_weights = lm.weights.array() / sd.transpose().array();
  out.intercept = lm.intercept - (lm.weights.array() * mean.transpose().array() / sd.transpose().array()).sum();

  const Eigen::VectorXd fitted = lm.predict(Zs);
  const double ss_res = w.dot((yv - fitted).array().square().matrix());
  const double ss_tot = w.dot((yv.array() - ymean).square().matrix());
  out.local_fidelity_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

  std::vector<std::size_t> order(p);
  for (std::size_t j = 0; j < p; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(lm.weights(static_cast<Eigen::Index>(a))) > std::abs(lm.weights(static_cast<Eigen::Index>(b)));
  });
  for (std::size_t r = 0; r < std::min(cfg.n_rules, p); ++r) {
    const auto j = order[r];
    const auto jj = static_cast<Eigen::Index>(j);
    if (lm.weights(jj) == 0.0) break;
    std::vector<double> col(Z.col(jj).data(), Z.col(jj).data() + Z.rows());
    std::sort(col.begin(), col.end());
    const double q[3] = {detail::quantile_sorted(col, 0.25), detail::quantile_sorted(col, 0.5),
                         detail::quantile_sorted(col, 0.75)};
    FeatureRule rule;
    rule.feature = space[j].name;
    rule.index = j;
    rule.weight = out.surrogate_weights(jj);
    const double v = x(jj);
    if (v <= q[0]) {
      rule.hi = q[0];
      rule.text = rule.feature + " <= " + detail::fmt2(q[0]);
    } else if (v > q[2]) {
      rule.lo = q[2];
      rule.text = rule.feature + " > " + detail::fmt2(q[2]);
    } else {
      const int k = v <= q[1] ? 0 : 1;
      rule.lo = q[k];
      rule.hi = q[k + 1];
      rule.text = detail::fmt2(q[k]) + " < " + rule.feature + " <= " + detail::fmt2(q[k + 1]);
    }
    out.feature_rules.push_back(std::move(rule));
  }
  out.samples = std::move(Z);
  out.sample_weights = std::move(w);
  return out;
}

inline nlohmann::json to_json(const LocalExplanation& e) {
  auto bound = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : e.feature_rules)
    rules.push_back({{"feature", r.feature}, {"rule", r.text}, {"lo", bound(r.lo)}, {"hi", bound(r.hi)}, {"weight", r.weight}});
  return {{"rules", rules},
          {"intercept", e.intercept},
          {"local_fidelity_r2", e.local_fidelity_r2},
          {"prediction", e.prediction},
          {"prediction_range", {e.range_lo, e.range_hi}},
          {"kernel_width", e.kernel_width}};
}

}  // namespace cgpa
