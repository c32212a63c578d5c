#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/explain/lime.hpp"
#include "cgpa/explain/shapley.hpp"

namespace cgpa {

/// Factors a student cannot change.
inline const std::set<std::string>& non_actionable_factors() {
  static const std::set<std::string> s{"G", "FE", "ME", "SSC", "HSC", "DI", "YS", "MI"};
  return s;
}

inline std::set<std::string> actionable_factors(const std::vector<std::string>& features) {
  std::set<std::string> out;
  for (const auto& f : features)
    if (!non_actionable_factors().count(f)) out.insert(f);
  return out;
}

struct Recommendation {
  std::string feature;
  std::size_t index = 0;
  std::string direction;  // increase | decrease | keep
  double phi = 0.0;
  double current_value = 0.0;  // model units
  double target_value = 0.0;
  double expected_gain = 0.0;  // model output at the target minus at x
  std::string rationale;
};

/// Features with negative attribution, most negative first, restricted to the
/// actionable set (never one of the fixed factors). Each feature is swept over
/// its admissible values with the others held at x; the direction points to
/// the value with the highest model output.
inline std::vector<Recommendation> recommend(const Attribution& attr, const ModelFn& f, const Eigen::VectorXd& x,
                                             const FeatureSpace& space, const std::set<std::string>& actionable,
                                             std::size_t k) {
  if (static_cast<std::size_t>(attr.phi.size()) != space.size() || x.size() != attr.phi.size())
    fail(ErrorCode::DimensionMismatch, "attribution, input and feature space widths differ");
  std::vector<std::size_t> cand;
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto& name = space[j].name;
    if (attr.phi(static_cast<Eigen::Index>(j)) < 0 && actionable.count(name) && !non_actionable_factors().count(name))
      cand.push_back(j);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    return attr.phi(static_cast<Eigen::Index>(a)) < attr.phi(static_cast<Eigen::Index>(b));
  });
  if (cand.size() > k) cand.resize(k);

  const double current = f(x);
  std::vector<Recommendation> out;
  for (auto j : cand) {
    const auto jj = static_cast<Eigen::Index>(j);
    Recommendation r;
    r.feature = space[j].name;
    r.index = j;
    r.phi = attr.phi(jj);
    r.current_value = x(jj);
    r.target_value = x(jj);
    double best = current;
    Eigen::VectorXd z = x;
    for (double v : space[j].values) {
      z(jj) = v;
      const double out_v = f(z);
      if (out_v > best) {
        best = out_v;
        r.target_value = v;
      }
    }
    r.expected_gain = best - current;
    if (r.target_value > r.current_value) r.direction = "increase";
    else if (r.target_value < r.current_value) r.direction = "decrease";
    else r.direction = "keep";
    r.rationale = r.feature + " lowers the prediction by " + detail::fmt2(-r.phi);
    if (r.direction != "keep") r.rationale += "; moving it changes the prediction by +" + detail::fmt2(r.expected_gain);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<Recommendation>& recs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : recs)
    out.push_back({{"feature", r.feature},
                   {"direction", r.direction},
                   {"phi", r.phi},
                   {"current_value", r.current_value},
                   {"target_value", r.target_value},
                   {"expected_gain", r.expected_gain},
                   {"rationale", r.rationale}});
  return out;
}

}  // namespace cgpa
