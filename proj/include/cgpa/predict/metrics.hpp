#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"

namespace cgpa {

struct CgpaBand {
  std::size_t index = 0;
  std::string label;
  double lo = 0.0;
  double hi = 0.0;  // exclusive except for the top band
};

inline const std::array<CgpaBand, 4>& cgpa_bands() {
  static const std::array<CgpaBand, 4> bands{{{0, "<2.50", 0.0, 2.5},
                                              {1, "2.50-2.99", 2.5, 3.0},
                                              {2, "3.00-3.49", 3.0, 3.5},
                                              {3, "3.50-4.00", 3.5, 4.0}}};
  return bands;
}

/// Left-closed bands over [0, 4]; 4.0 falls in the top band.
inline const CgpaBand& bin_cgpa(double cgpa) {
  if (!(cgpa >= 0.0 && cgpa <= 4.0)) fail(ErrorCode::OutOfRange, "CGPA " + std::to_string(cgpa) + " outside [0, 4]");
  const auto& b = cgpa_bands();
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (cgpa < b[i].hi) return b[i];
  return b.back();
}

inline nlohmann::json cgpa_bands_json() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : cgpa_bands()) out.push_back({{"index", b.index}, {"label", b.label}, {"lo", b.lo}, {"hi", b.hi}});
  return out;
}

struct RegressionMetrics {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_weighted = 0.0;
  std::vector<double> f1_per_class;
  std::vector<std::vector<std::size_t>> confusion;  // rows: true label, cols: predicted label
  std::vector<std::size_t> absent_classes;          // labels without any true instance
  bool absent_class_warning = false;
};

/// R^2 is relative to the mean of y_true and is 0 when y_true is constant and
/// the predictions are not exact.
inline RegressionMetrics regression_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) fail(ErrorCode::LengthMismatch, "y_true and y_pred lengths differ");
  if (y_true.size() < 2) fail(ErrorCode::LengthMismatch, "need at least two observations");
  const auto n = static_cast<double>(y_true.size());
  const Eigen::ArrayXd e = (y_true - y_pred).array();
  RegressionMetrics m;
  m.mae = e.abs().sum() / n;
  m.mse = e.square().sum() / n;
  m.rmse = std::sqrt(m.mse);
  const double ss_tot = (y_true.array() - y_true.mean()).square().sum();
  const double ss_res = e.square().sum();
  if (ss_tot > 0) m.r2 = 1.0 - ss_res / ss_tot;
  else m.r2 = ss_res == 0.0 ? 1.0 : 0.0;
  return m;
}

/// Labels are integers 0..n_labels-1.
inline ClassificationMetrics classification_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred,
                                                    std::size_t n_labels) {
  if (y_true.size() != y_pred.size()) fail(ErrorCode::LengthMismatch, "y_true and y_pred lengths differ");
  if (y_true.size() == 0) fail(ErrorCode::LengthMismatch, "no observations");
  ClassificationMetrics m;
  m.confusion.assign(n_labels, std::vector<std::size_t>(n_labels, 0));
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true(i));
    const auto p = static_cast<std::size_t>(y_pred(i));
    if (t >= n_labels || p >= n_labels || y_true(i) < 0 || y_pred(i) < 0)
      fail(ErrorCode::OutOfRange, "label outside 0.." + std::to_string(n_labels - 1));
    ++m.confusion[t][p];
    correct += t == p;
  }
  const auto n = static_cast<double>(y_true.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.f1_per_class.assign(n_labels, 0.0);
  for (std::size_t c = 0; c < n_labels; ++c) {
    std::size_t support = 0, predicted = 0;
    for (std::size_t k = 0; k < n_labels; ++k) {
      support += m.confusion[c][k];
      predicted += m.confusion[k][c];
    }
    const auto tp = static_cast<double>(m.confusion[c][c]);
    if (support == 0) {
      m.absent_classes.push_back(c);
      m.absent_class_warning = true;
    }
    const double denom = static_cast<double>(support + predicted);
    m.f1_per_class[c] = denom > 0 ? 2.0 * tp / denom : 0.0;
    m.f1_macro += m.f1_per_class[c];
    m.f1_weighted += m.f1_per_class[c] * static_cast<double>(support);
  }
  m.f1_macro /= static_cast<double>(n_labels);
  m.f1_weighted /= n;
  return m;
}

inline nlohmann::json to_json(const RegressionMetrics& m) {
  return {{"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse}, {"r2", m.r2}};
}

inline nlohmann::json to_json(const ClassificationMetrics& m) {
  return {{"accuracy", m.accuracy},       {"f1_macro", m.f1_macro},
          {"f1_weighted", m.f1_weighted}, {"f1_per_class", m.f1_per_class},
          {"confusion_matrix", m.confusion}, {"absent_classes", m.absent_classes},
          {"absent_class_warning", m.absent_class_warning}};
}

/// Aligned two-column table of name/value rows.
inline std::string format_table(const std::vector<std::pair<std::string, double>>& rows) {
  std::size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(w + 2)) << k << std::right << v << '\n';
  return os.str();
}

}  // namespace cgpa
