#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/predict/linear.hpp"

namespace cgpa {

using ModelFn = std::function<double(const Eigen::VectorXd&)>;

enum class AttributionMethod { ExactLinear, BruteForce, Sampled };

/// Per-feature contributions. base_value is the model output at the
/// background mean, so base_value + sum(phi) equals prediction.
struct Attribution {
  double base_value = 0.0;
  double prediction = 0.0;
  Eigen::VectorXd phi;
  Eigen::VectorXd standard_error;  // zeros for the exact methods
  AttributionMethod method = AttributionMethod::ExactLinear;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  double efficiency_gap() const { return prediction - base_value - phi.sum(); }
};

inline std::string_view to_string(AttributionMethod m) {
  switch (m) {
    case AttributionMethod::ExactLinear: return "exact_linear";
    case AttributionMethod::BruteForce: return "brute_force";
    case AttributionMethod::Sampled: return "sampled";
  }
  return "exact_linear";
}

inline Eigen::VectorXd background_mean(const Eigen::MatrixXd& background) {
  if (background.rows() == 0) fail(ErrorCode::EmptyData, "empty background set");
  return background.colwise().mean().transpose();
}

inline Attribution shapley_exact_linear(const LinearModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& mu) {
  if (x.size() != model.weights.size() || mu.size() != model.weights.size())
    fail(ErrorCode::DimensionMismatch, "feature vector length differs from the model");
  Attribution a;
  a.method = AttributionMethod::ExactLinear;
  a.phi = model.weights.cwiseProduct(x - mu);
  a.standard_error = Eigen::VectorXd::Zero(x.size());
  a.base_value = model.predict_one(mu);
  a.prediction = model.predict_one(x);
  return a;
}

inline Attribution shapley_exact_linear(const LinearModel& model, const Eigen::VectorXd& x,
                                        const Eigen::MatrixXd& background) {
  return shapley_exact_linear(model, x, background_mean(background));
}

/// Coefficient |S|! (p - |S| - 1)! / p! of a coalition of size s.
inline double shapley_weight(std::size_t s, std::size_t p) {
  return std::exp(std::lgamma(static_cast<double>(s) + 1) + std::lgamma(static_cast<double>(p - s)) -
                  std::lgamma(static_cast<double>(p) + 1));
}

/// Exact enumeration over all 2^p coalitions; absent features take their background mean.
inline Attribution shapley_brute_force(const ModelFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                       std::size_t max_features = 12) {
  const auto p = static_cast<std::size_t>(x.size());
  if (p > max_features)
    fail(ErrorCode::TooManyFeatures, std::to_string(p) + " features exceed the limit of " + std::to_string(max_features));
  if (static_cast<std::size_t>(mu.size()) != p) fail(ErrorCode::DimensionMismatch, "background width differs from x");
  const std::size_t subsets = std::size_t{1} << p;
  std::vector<double> value(subsets);
  Eigen::VectorXd z(x.size());
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t j = 0; j < p; ++j) z(static_cast<Eigen::Index>(j)) = (s >> j) & 1 ? x(static_cast<Eigen::Index>(j)) : mu(static_cast<Eigen::Index>(j));
    value[s] = f(z);
  }
  std::vector<double> w(p + 1, 0.0);
  for (std::size_t s = 0; s < p; ++s) w[s] = shapley_weight(s, p);
  Attribution a;
  a.method = AttributionMethod::BruteForce;
  a.phi = Eigen::VectorXd::Zero(x.size());
  a.standard_error = Eigen::VectorXd::Zero(x.size());
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double acc = 0.0;
    for (std::size_t s = 0; s < subsets; ++s)
      if (!(s & bit)) acc += w[static_cast<std::size_t>(__builtin_popcountll(s))] * (value[s | bit] - value[s]);
    a.phi(static_cast<Eigen::Index>(j)) = acc;
  }
  a.base_value = value[0];
  a.prediction = value[subsets - 1];
  return a;
}

/// Permutation sampling: each of n_samples random orderings switches features
/// from the background mean to x one at a time and credits each change.
inline Attribution shapley_sampled(const ModelFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                   std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) fail(ErrorCode::InvalidArgument, "need at least two permutations");
  if (mu.size() != x.size()) fail(ErrorCode::DimensionMismatch, "background width differs from x");
  const auto p = static_cast<std::size_t>(x.size());
  Rng rng(seed);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size()), sum_sq = Eigen::VectorXd::Zero(x.size());
  const double base = f(mu);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto order = rng.permutation(p);
    Eigen::VectorXd z = mu;
    double prev = base;
    for (auto j : order) {
      const auto jj = static_cast<Eigen::Index>(j);
      z(jj) = x(jj);
      const double cur = f(z);
      sum(jj) += cur - prev;
      sum_sq(jj) += (cur - prev) * (cur - prev);
      prev = cur;
    }
  }
  const auto n = static_cast<double>(n_samples);
  Attribution a;
  a.method = AttributionMethod::Sampled;
  a.n_samples = n_samples;
  a.seed = seed;
  a.phi = sum / n;
  const Eigen::ArrayXd var = ((sum_sq.array() - n * a.phi.array().square()) / (n - 1.0)).max(0.0);
  a.standard_error = (var / n).sqrt().matrix();
  a.base_value = base;
  a.prediction = f(x);
  return a;
}

/// `raw_values` (optional) are the human-readable inputs shown next to phi.
inline nlohmann::json to_json(const Attribution& a, const std::vector<std::string>& names,
                              const std::vector<std::string>& raw_values = {}) {
  nlohmann::json contributions = nlohmann::json::array();
  for (Eigen::Index j = 0; j < a.phi.size(); ++j) {
    nlohmann::json c{{"feature", names.at(static_cast<std::size_t>(j))}, {"phi", a.phi(j)}};
    if (!raw_values.empty()) c["raw_value"] = raw_values.at(static_cast<std::size_t>(j));
    if (a.method == AttributionMethod::Sampled) c["standard_error"] = a.standard_error(j);
    contributions.push_back(c);
  }
  nlohmann::json j{{"base_value", a.base_value},
                   {"prediction", a.prediction},
                   {"method", to_string(a.method)},
                   {"contributions", contributions}};
  if (a.method == AttributionMethod::Sampled) {
    j["n_samples"] = a.n_samples;
    j["seed"] = a.seed;
  }
  return j;
}

}  // namespace cgpa
