#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/hash.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/data/record.hpp"
#include "cgpa/data/schema.hpp"
#include "cgpa/predict/cv.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/predict/model.hpp"

namespace cgpa {

enum class TargetKind { Regression, Band };

struct TrainConfig {
  ModelSpec spec;
  TargetKind target = TargetKind::Regression;  // unit-scaled CGPA or its band index
  double test_fraction = 0.2;
  std::uint64_t seed = 0;  // split seed; the model seed lives in spec
};

/// A trained model together with everything needed to encode new inputs.
struct Artifact {
  int version = 1;
  std::string schema_hash;
  TrainConfig config;
  FittedModel model;
  std::vector<std::string> features;
  std::vector<ColumnScaling> scaling;  // per feature
  ColumnScaling target_scaling;
  EncodingMap encoding_map;
  Eigen::VectorXd background_mean;  // training-split feature means in model units
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<RegressionMetrics> train_regression, test_regression;
  std::optional<ClassificationMetrics> train_classification, test_classification;
  nlohmann::json extra_metadata = nlohmann::json::object();

  /// Encoded, scaled feature vector of a record (CGPA not needed).
  Eigen::VectorXd encode(const StudentRecord& r, const FactorSchema& schema) const {
    return encode_with(r, schema, features, scaling);
  }
  double predict_encoded(const Eigen::VectorXd& x) const { return predict_one(model, x); }
};

inline std::string_view to_string(TargetKind t) { return t == TargetKind::Regression ? "regression" : "band"; }

inline TargetKind target_kind_from_string(std::string_view s) {
  if (s == "regression") return TargetKind::Regression;
  if (s == "band") return TargetKind::Band;
  fail(ErrorCode::InvalidArgument, "unknown target '" + std::string(s) + "'");
}

/// Targets of a dataset that contains the CGPA column.
inline Eigen::VectorXd target_vector(const NumericDataset& ds, TargetKind target) {
  const auto c = ds.column_index(FactorSchema::kTarget);
  Eigen::VectorXd y = ds.matrix().col(static_cast<Eigen::Index>(c));
  if (target == TargetKind::Band) {
    const auto& s = ds.scaling()[c];
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      // Rounding guards against 3.4999999 from the unit-interval round trip.
      const double raw = std::round(s.invert(y(i)) * 1e9) / 1e9;
      y(i) = static_cast<double>(bin_cgpa(raw).index);
    }
  }
  return y;
}

inline Eigen::MatrixXd feature_matrix(const NumericDataset& ds, const std::vector<std::string>& features) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.rows()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    X.col(static_cast<Eigen::Index>(j)) = ds.matrix().col(static_cast<Eigen::Index>(ds.column_index(features[j])));
  return X;
}

/// Encodes, splits (scaling fit on the training part), fits and scores.
inline Artifact train_pipeline(const std::vector<StudentRecord>& records, const FactorSchema& schema,
                               const TrainConfig& cfg) {
  const auto features = schema.feature_acronyms();
  const auto ds = encode_and_scale(records, schema, default_scaling_policy(schema));
  const auto split = train_test_split_indexed(ds, cfg.test_fraction, cfg.seed);
  const Eigen::MatrixXd Xtr = feature_matrix(split.train, features);
  const Eigen::MatrixXd Xte = feature_matrix(split.test, features);
  const Eigen::VectorXd ytr = target_vector(split.train, cfg.target);
  const Eigen::VectorXd yte = target_vector(split.test, cfg.target);

  ModelSpec spec = cfg.spec;
  if (cfg.target == TargetKind::Band && (spec.kind == ModelKind::Tree || spec.kind == ModelKind::Forest))
    spec.task = TreeTask::Classification;
  if (cfg.target == TargetKind::Regression && spec.is_classifier())
    fail(ErrorCode::InvalidArgument, std::string(to_string(spec.kind)) + " cannot fit a regression target");
  if (cfg.target == TargetKind::Band && !spec.is_classifier())
    fail(ErrorCode::InvalidArgument, std::string(to_string(spec.kind)) + " cannot fit a band target");

  Artifact a;
  a.schema_hash = schema_hash(schema);
  a.config = cfg;
  a.config.spec = spec;
  a.features = features;
  for (const auto& f : features) {
    a.scaling.push_back(split.train.scaling()[split.train.column_index(f)]);
    if (split.train.is_categorical(f)) a.encoding_map[f] = split.train.encoding_map().at(f);
  }
  a.target_scaling = split.train.scaling()[split.train.column_index(FactorSchema::kTarget)];
  a.background_mean = Xtr.colwise().mean().transpose();
  a.n_train = static_cast<std::size_t>(Xtr.rows());
  a.n_test = static_cast<std::size_t>(Xte.rows());
  const std::size_t n_classes = cgpa_bands().size();
  a.model = fit_model(spec, Xtr, ytr, cfg.target == TargetKind::Band ? n_classes : 0);
  const Eigen::VectorXd ptr = predict(a.model, Xtr);
  const Eigen::VectorXd pte = predict(a.model, Xte);
  if (cfg.target == TargetKind::Band) {
    a.train_classification = classification_metrics(ytr, ptr, n_classes);
    a.test_classification = classification_metrics(yte, pte, n_classes);
  } else {
    a.train_regression = regression_metrics(ytr, ptr);
    a.test_regression = regression_metrics(yte, pte);
  }
  return a;
}

/// k-fold CV of the pipeline's model on all records. Continuous features are
/// z-scored per training fold rather than once on the full data.
inline CvResult cross_validate_pipeline(const std::vector<StudentRecord>& records, const FactorSchema& schema,
                                        const TrainConfig& cfg, std::size_t k, std::size_t jobs = 1) {
  ScalingPolicy policy{{std::string(FactorSchema::kTarget), ScalingMethod::UnitInterval}};
  const auto ds = encode_and_scale(records, schema, policy);
  const auto features = schema.feature_acronyms();
  std::vector<std::size_t> zcols;
  for (std::size_t j = 0; j < features.size(); ++j)
    if (schema.at(features[j]).continuous()) zcols.push_back(j);
  ModelSpec spec = cfg.spec;
  if (cfg.target == TargetKind::Band && (spec.kind == ModelKind::Tree || spec.kind == ModelKind::Forest))
    spec.task = TreeTask::Classification;
  return cross_validate(spec, feature_matrix(ds, features), target_vector(ds, cfg.target), k, cfg.seed, zcols, jobs,
                        cfg.target == TargetKind::Band ? cgpa_bands().size() : 0);
}

inline nlohmann::json metrics_json(const Artifact& a) {
  nlohmann::json m = nlohmann::json::object();
  if (a.test_regression) {
    m["train"] = to_json(*a.train_regression);
    m["test"] = to_json(*a.test_regression);
  }
  if (a.test_classification) {
    m["train_accuracy"] = a.train_classification->accuracy;
    m["test_accuracy"] = a.test_classification->accuracy;
    m["test"] = to_json(*a.test_classification);
  }
  return m;
}

inline nlohmann::json to_json(const Artifact& a) {
  nlohmann::json scaling = nlohmann::json::array();
  for (const auto& s : a.scaling) scaling.push_back(to_json(s));
  const auto& s = a.config.spec;
  nlohmann::json params{{"lambda", s.lambda},
                        {"mix", s.mix},
                        {"task", s.task == TreeTask::Regression ? "regression" : "classification"},
                        {"max_depth", s.tree.max_depth},
                        {"min_samples_leaf", s.tree.min_samples_leaf},
                        {"n_trees", s.forest.n_trees},
                        {"logistic_l2", s.logistic.l2},
                        {"k", s.k},
                        {"seed", s.seed},
                        {"fitted", to_json(a.model)}};
  return {{"format_version", 1},
          {"version", a.version},
          {"schema_hash", a.schema_hash},
          {"model_kind", to_string(s.kind)},
          {"target", to_string(a.config.target)},
          {"features", a.features},
          {"parameters", params},
          {"scaling", scaling},
          {"target_scaling", to_json(a.target_scaling)},
          {"encoding_map", a.encoding_map},
          {"cgpa_bands", cgpa_bands_json()},
          {"training_metadata",
           {{"n_train", a.n_train},
            {"n_test", a.n_test},
            {"split_seed", a.config.seed},
            {"test_fraction", a.config.test_fraction},
            {"background_mean", vector_to_json(a.background_mean)},
            {"extra", a.extra_metadata}}},
          {"metrics", metrics_json(a)}};
}

inline Artifact artifact_from_json(const nlohmann::json& j) {
  Artifact a;
  a.version = j.at("version").get<int>();
  a.schema_hash = j.at("schema_hash").get<std::string>();
  auto& s = a.config.spec;
  s.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  a.config.target = target_kind_from_string(j.at("target").get<std::string>());
  a.features = j.at("features").get<std::vector<std::string>>();
  const auto& p = j.at("parameters");
  s.lambda = p.at("lambda").get<double>();
  s.mix = p.at("mix").get<double>();
  s.task = p.at("task").get<std::string>() == "regression" ? TreeTask::Regression : TreeTask::Classification;
  s.tree.max_depth = p.at("max_depth").get<std::size_t>();
  s.tree.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
  s.forest.n_trees = p.at("n_trees").get<std::size_t>();
  s.logistic.l2 = p.at("logistic_l2").get<double>();
  s.k = p.at("k").get<std::size_t>();
  s.seed = p.at("seed").get<std::uint64_t>();
  a.model = fitted_model_from_json(p.at("fitted"));
  for (const auto& js : j.at("scaling")) a.scaling.push_back(column_scaling_from_json(js));
  a.target_scaling = column_scaling_from_json(j.at("target_scaling"));
  a.encoding_map = j.at("encoding_map").get<EncodingMap>();
  const auto& md = j.at("training_metadata");
  a.n_train = md.at("n_train").get<std::size_t>();
  a.n_test = md.at("n_test").get<std::size_t>();
  a.config.seed = md.at("split_seed").get<std::uint64_t>();
  a.config.test_fraction = md.at("test_fraction").get<double>();
  a.background_mean = vector_from_json(md.at("background_mean"));
  a.extra_metadata = md.value("extra", nlohmann::json::object());
  const auto& m = j.at("metrics");
  auto reg = [](const nlohmann::json& r) {
    return RegressionMetrics{r.at("mae").get<double>(), r.at("mse").get<double>(), r.at("rmse").get<double>(),
                             r.at("r2").get<double>()};
  };
  if (a.config.target == TargetKind::Regression && m.contains("test")) {
    a.train_regression = reg(m.at("train"));
    a.test_regression = reg(m.at("test"));
  }
  if (a.config.target == TargetKind::Band && m.contains("test")) {
    const auto& t = m.at("test");
    ClassificationMetrics c;
    c.accuracy = t.at("accuracy").get<double>();
    c.f1_macro = t.at("f1_macro").get<double>();
    c.f1_weighted = t.at("f1_weighted").get<double>();
    c.f1_per_class = t.at("f1_per_class").get<std::vector<double>>();
    c.confusion = t.at("confusion_matrix").get<std::vector<std::vector<std::size_t>>>();
    c.absent_classes = t.at("absent_classes").get<std::vector<std::size_t>>();
    c.absent_class_warning = t.at("absent_class_warning").get<bool>();
    a.test_classification = c;
    a.train_classification = ClassificationMetrics{};
    a.train_classification->accuracy = m.at("train_accuracy").get<double>();
  }
  if (a.features.size() != a.scaling.size() || feature_count(a.model) != a.features.size())
    fail(ErrorCode::ArtifactCorrupt, "artifact feature metadata is inconsistent");
  return a;
}

/// Writes {"artifact": ..., "sha256": ...} where the checksum covers the
/// compact dump of the artifact object.
inline void save_artifact(const Artifact& a, const std::filesystem::path& path) {
  const auto body = to_json(a);
  const nlohmann::json doc{{"artifact", body}, {"sha256", sha256_hex(body.dump())}};
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp);
    out << doc.dump(1) << '\n';
    if (!out) fail(ErrorCode::Io, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json read_artifact_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, "artifact " + path.string() + " not found");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ArtifactCorrupt, "artifact " + path.string() + " is not valid JSON");
  }
  if (!doc.contains("artifact") || !doc.contains("sha256"))
    fail(ErrorCode::ArtifactCorrupt, "artifact " + path.string() + " lacks a checksum");
  if (sha256_hex(doc["artifact"].dump()) != doc["sha256"].get<std::string>())
    fail(ErrorCode::ArtifactCorrupt, "checksum mismatch in " + path.string());
  return doc["artifact"];
}

inline Artifact load_artifact(const std::filesystem::path& path) {
  const auto j = read_artifact_json(path);
  try {
    return artifact_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ArtifactCorrupt, std::string("malformed artifact: ") + e.what());
  }
}

}  // namespace cgpa
