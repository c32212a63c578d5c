#pragma once

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/predict/pipeline.hpp"

namespace cgpa {

/// One row of the model-comparison tables.
struct ComparisonEntry {
  std::string name;
  std::string source;  // "artifact" or "external"
  TargetKind target = TargetKind::Regression;
  std::optional<RegressionMetrics> test_regression;
  std::optional<double> train_accuracy;
  std::optional<ClassificationMetrics> test_classification;
  std::optional<double> cv_mean;  // R^2 or accuracy, as a fraction
};

inline ComparisonEntry comparison_entry(const std::string& name, const Artifact& a) {
  ComparisonEntry e{name, "artifact", a.config.target, a.test_regression, std::nullopt, a.test_classification,
                    std::nullopt};
  if (a.train_classification) e.train_accuracy = a.train_classification->accuracy;
  if (a.extra_metadata.contains("cv")) e.cv_mean = a.extra_metadata["cv"].at("mean").get<double>();
  return e;
}

/// External predictions: {"model", "target", "y_true", "y_pred"[, "train_accuracy"]}.
/// Band targets are class indices 0..3.
inline ComparisonEntry comparison_entry_from_predictions(const nlohmann::json& j) {
  try {
    ComparisonEntry e;
    e.name = j.at("model").get<std::string>();
    e.source = "external";
    e.target = target_kind_from_string(j.at("target").get<std::string>());
    const auto yt = j.at("y_true").get<std::vector<double>>();
    const auto yp = j.at("y_pred").get<std::vector<double>>();
    if (yt.size() != yp.size()) fail(ErrorCode::LengthMismatch, "y_true and y_pred lengths differ");
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(yt.data(), static_cast<Eigen::Index>(yt.size()));
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(yp.data(), static_cast<Eigen::Index>(yp.size()));
    if (e.target == TargetKind::Regression)
      e.test_regression = regression_metrics(a, b);
    else
      e.test_classification = classification_metrics(a, b, cgpa_bands().size());
    if (j.contains("train_accuracy")) e.train_accuracy = j["train_accuracy"].get<double>();
    if (j.contains("cv_mean")) e.cv_mean = j["cv_mean"].get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::Parse, std::string("prediction file: ") + ex.what());
  }
}

namespace detail {

inline std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) os << std::left << std::setw(static_cast<int>(w[c])) << r[c];
      else os << "  " << std::right << std::setw(static_cast<int>(w[c])) << r[c];
    }
    os << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto x : w) rule.emplace_back(x, '-');
  line(rule);
  for (const auto& r : rows) line(r);
  return os.str();
}

inline std::string num(std::optional<double> v, int precision = 4) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

}  // namespace detail

/// Aligned-text regression and classification tables.
inline std::string comparison_tables(const std::vector<ComparisonEntry>& entries) {
  std::vector<std::vector<std::string>> reg, cls;
  for (const auto& e : entries) {
    const auto cv = e.cv_mean ? std::optional<double>(100.0 * *e.cv_mean) : std::nullopt;
    if (e.test_regression) {
      const auto& m = *e.test_regression;
      reg.push_back({e.name, detail::num(m.mae), detail::num(m.mse), detail::num(m.rmse), detail::num(m.r2),
                     detail::num(cv, 2)});
    }
    if (e.test_classification) {
      const auto& m = *e.test_classification;
      const auto tr = e.train_accuracy ? std::optional<double>(100.0 * *e.train_accuracy) : std::nullopt;
      cls.push_back({e.name, detail::num(tr, 2), detail::num(100.0 * m.accuracy, 2), detail::num(100.0 * m.f1_macro, 2),
                     detail::num(100.0 * m.f1_weighted, 2), detail::num(cv, 2)});
    }
  }
  std::string out;
  if (!reg.empty())
    out += "Regression (test split; CV% = mean cross-validated R^2 x 100)\n" +
           detail::table({"model", "MAE", "MSE", "RMSE", "R2", "CV%"}, reg);
  if (!cls.empty()) {
    if (!out.empty()) out += '\n';
    out += "Band classification (CV% = mean cross-validated accuracy x 100)\n" +
           detail::table({"model", "train_acc%", "test_acc%", "F1_macro%", "F1_weighted%", "CV%"}, cls);
  }
  return out;
}

inline nlohmann::json to_json(const ComparisonEntry& e) {
  nlohmann::json j{{"model", e.name}, {"source", e.source}, {"target", to_string(e.target)}};
  if (e.test_regression) j["test"] = to_json(*e.test_regression);
  if (e.test_classification) j["test"] = to_json(*e.test_classification);
  if (e.train_accuracy) j["train_accuracy"] = *e.train_accuracy;
  j["cv_mean"] = e.cv_mean ? nlohmann::json(*e.cv_mean) : nlohmann::json(nullptr);
  return j;
}

}  // namespace cgpa
