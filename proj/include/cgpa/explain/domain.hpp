#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cgpa/data/schema.hpp"
#include "cgpa/explain/lime.hpp"
#include "cgpa/predict/pipeline.hpp"

namespace cgpa {

/// Perturbation and sweep domain derived from an artifact alone: scaled level
/// codes for encoded factors, a 9-point grid over the declared range for
/// continuous ones. z-scored features have unit sd in model units.
inline FeatureSpace artifact_feature_space(const Artifact& a, const FactorSchema& schema) {
  FeatureSpace fs;
  for (std::size_t j = 0; j < a.features.size(); ++j) {
    const auto& f = schema.at(a.features[j]);
    const auto& s = a.scaling[j];
    FeatureDomain d;
    d.name = f.acronym;
    d.categorical = !f.continuous();
    if (d.categorical) {
      for (std::size_t l = 0; l < f.levels.size(); ++l) d.values.push_back(s.apply(static_cast<double>(l)));
    } else {
      for (int i = 0; i <= 8; ++i) d.values.push_back(s.apply(f.range.min + (f.range.max - f.range.min) * i / 8.0));
      d.sd = s.method == ScalingMethod::ZScore ? 1.0 : (f.range.max - f.range.min) / (4.0 * s.scale);
    }
    fs.push_back(std::move(d));
  }
  return fs;
}

/// As above, with continuous sds taken from encoded sample rows.
inline FeatureSpace artifact_feature_space(const Artifact& a, const FactorSchema& schema, const Eigen::MatrixXd& X) {
  auto fs = artifact_feature_space(a, schema);
  if (X.rows() < 2) return fs;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    if (fs[j].categorical) continue;
    const auto col = X.col(static_cast<Eigen::Index>(j)).array();
    fs[j].sd = std::sqrt((col - col.mean()).square().sum() / static_cast<double>(X.rows() - 1));
  }
  return fs;
}

}  // namespace cgpa
