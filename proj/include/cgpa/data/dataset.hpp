#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/data/record.hpp"
#include "cgpa/data/schema.hpp"

namespace cgpa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ScalingMethod { None, ZScore, UnitInterval };

inline std::string_view to_string(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::None: return "none";
    case ScalingMethod::ZScore: return "zscore";
    case ScalingMethod::UnitInterval: return "unit_interval";
  }
  return "none";
}

inline ScalingMethod scaling_method_from_string(std::string_view s) {
  if (s == "none") return ScalingMethod::None;
  if (s == "zscore") return ScalingMethod::ZScore;
  if (s == "unit_interval") return ScalingMethod::UnitInterval;
  fail(ErrorCode::Parse, "unknown scaling method '" + std::string(s) + "'");
}

/// scaled = (raw - offset) / scale
struct ColumnScaling {
  ScalingMethod method = ScalingMethod::None;
  double offset = 0.0;
  double scale = 1.0;

  double apply(double raw) const { return (raw - offset) / scale; }
  double invert(double scaled) const { return scaled * scale + offset; }
  bool operator==(const ColumnScaling&) const = default;
};

/// Per-factor scaling method. Factors not listed are left unscaled.
using ScalingPolicy = std::map<std::string, ScalingMethod>;

/// z-score for the continuous features, unit interval for the target.
inline ScalingPolicy default_scaling_policy(const FactorSchema& schema) {
  ScalingPolicy p;
  for (const auto& f : schema.factors()) {
    if (!f.continuous()) continue;
    p[f.acronym] = f.acronym == FactorSchema::kTarget ? ScalingMethod::UnitInterval
                                                       : ScalingMethod::ZScore;
  }
  return p;
}

/// Ordered level list per categorical/ordinal factor; position is the code.
using EncodingMap = std::map<std::string, std::vector<std::string>>;

/// Encoded, scaled sample matrix. Immutable after construction.
class NumericDataset {
 public:
  NumericDataset() = default;

  NumericDataset(Matrix matrix, std::vector<std::string> columns,
                 std::vector<ColumnScaling> scaling = {}, EncodingMap encoding = {},
                 std::map<std::string, Range> unit_ranges = {})
      : matrix_(std::move(matrix)),
        columns_(std::move(columns)),
        scaling_(std::move(scaling)),
        encoding_(std::move(encoding)),
        unit_ranges_(std::move(unit_ranges)) {
    if (scaling_.empty()) scaling_.assign(columns_.size(), ColumnScaling{});
    if (static_cast<std::size_t>(matrix_.cols()) != columns_.size() ||
        scaling_.size() != columns_.size())
      fail(ErrorCode::DimensionMismatch, "dataset matrix/column metadata disagree");
    if (!matrix_.allFinite()) fail(ErrorCode::EmptyCell, "dataset contains missing entries");
  }

  std::size_t rows() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix_.cols()); }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<ColumnScaling>& scaling() const { return scaling_; }
  const EncodingMap& encoding_map() const { return encoding_; }
  const std::map<std::string, Range>& unit_ranges() const { return unit_ranges_; }

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return i;
    return std::nullopt;
  }

  std::size_t column_index(std::string_view name) const {
    if (auto i = find_column(name)) return *i;
    fail(ErrorCode::UnknownColumn, "dataset has no column '" + std::string(name) + "'");
  }

  Vector column(std::string_view name) const { return matrix_.col(column_index(name)); }

  bool is_categorical(std::string_view name) const {
    return encoding_.count(std::string(name)) > 0;
  }

  /// Matrix with every column mapped back to raw (encoded, unscaled) units.
  Matrix raw_matrix() const {
    Matrix raw = matrix_;
    for (std::size_t c = 0; c < cols(); ++c)
      for (Eigen::Index r = 0; r < raw.rows(); ++r) raw(r, c) = scaling_[c].invert(raw(r, c));
    return raw;
  }

  /// Subset of rows; scaling parameters are carried over unchanged.
  NumericDataset select_rows(const std::vector<std::size_t>& idx) const {
    Matrix m(static_cast<Eigen::Index>(idx.size()), matrix_.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) m.row(i) = matrix_.row(idx[i]);
    return NumericDataset(std::move(m), columns_, scaling_, encoding_, unit_ranges_);
  }

  /// Subset of columns by name, in the order given.
  NumericDataset select_columns(const std::vector<std::string>& names) const {
    Matrix m(matrix_.rows(), static_cast<Eigen::Index>(names.size()));
    std::vector<ColumnScaling> sc;
    EncodingMap enc;
    std::map<std::string, Range> ur;
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto c = column_index(names[i]);
      m.col(i) = matrix_.col(c);
      sc.push_back(scaling_[c]);
      if (auto it = encoding_.find(names[i]); it != encoding_.end()) enc.insert(*it);
      if (auto it = unit_ranges_.find(names[i]); it != unit_ranges_.end()) ur.insert(*it);
    }
    return NumericDataset(std::move(m), names, std::move(sc), std::move(enc), std::move(ur));
  }

  /// Same raw data re-scaled with `scaling` (one entry per column).
  NumericDataset rescaled(const std::vector<ColumnScaling>& scaling) const {
    Matrix raw = raw_matrix();
    for (std::size_t c = 0; c < cols(); ++c)
      for (Eigen::Index r = 0; r < raw.rows(); ++r) raw(r, c) = scaling[c].apply(raw(r, c));
    return NumericDataset(std::move(raw), columns_, scaling, encoding_, unit_ranges_);
  }

  /// Scaling parameters re-estimated from this dataset's rows, keeping each column's method.
  std::vector<ColumnScaling> fitted_scaling() const {
    Matrix raw = raw_matrix();
    std::vector<ColumnScaling> out;
    for (std::size_t c = 0; c < cols(); ++c) {
      ColumnScaling s{scaling_[c].method, 0.0, 1.0};
      if (s.method == ScalingMethod::ZScore) {
        s = fit_zscore(raw.col(c));
      } else if (s.method == ScalingMethod::UnitInterval) {
        s = scaling_[c];
      }
      out.push_back(s);
    }
    return out;
  }

  /// Decodes one row back to a survey record. Continuous values are exact up to
  /// floating-point rounding of the scaling transform.
  StudentRecord decode_row(std::size_t row) const {
    StudentRecord rec;
    for (std::size_t c = 0; c < cols(); ++c) {
      double raw = scaling_[c].invert(matrix_(row, c));
      if (auto it = encoding_.find(columns_[c]); it != encoding_.end()) {
        auto code = static_cast<long>(std::llround(raw));
        if (code < 0 || code >= static_cast<long>(it->second.size()))
          fail(ErrorCode::UnknownLevel, "code out of range for '" + columns_[c] + "'");
        rec.values.emplace(columns_[c], it->second[static_cast<std::size_t>(code)]);
      } else {
        rec.values.emplace(columns_[c], raw);
      }
    }
    return rec;
  }

  static ColumnScaling fit_zscore(const Vector& raw) {
    const double n = static_cast<double>(raw.size());
    const double mean = raw.mean();
    double sd = 1.0;
    if (raw.size() > 1) {
      sd = std::sqrt((raw.array() - mean).square().sum() / (n - 1.0));
      if (!(sd > 0.0)) sd = 1.0;
    }
    return {ScalingMethod::ZScore, mean, sd};
  }

 private:
  Matrix matrix_;
  std::vector<std::string> columns_;
  std::vector<ColumnScaling> scaling_;
  EncodingMap encoding_;
  std::map<std::string, Range> unit_ranges_;
};

/// Integer code of `value` for factor `f` by declared level order.
inline double encode_value(const FactorSpec& f, const RawValue& value) {
  if (f.continuous()) {
    if (const auto* d = std::get_if<double>(&value)) return *d;
    fail(ErrorCode::UnknownLevel, f.acronym + ": expected a number");
  }
  const auto* s = std::get_if<std::string>(&value);
  if (!s) fail(ErrorCode::UnknownLevel, f.acronym + ": expected a level label");
  auto idx = f.level_index(*s);
  if (!idx)
    throw Error(ErrorCode::UnknownLevel, "UnknownLevel: " + f.acronym + " = '" + *s + "'",
                std::nullopt, {f.acronym});
  return static_cast<double>(*idx);
}

/// Encodes records over `columns` (default: every schema factor) and applies `policy`.
/// z-score parameters are fitted on the given records.
inline NumericDataset encode_and_scale(const std::vector<StudentRecord>& records,
                                       const FactorSchema& schema, const ScalingPolicy& policy,
                                       std::vector<std::string> columns = {}) {
  if (columns.empty()) columns = schema.acronyms();
  Matrix raw(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(columns.size()));
  EncodingMap enc;
  std::map<std::string, Range> ranges;
  std::vector<const FactorSpec*> specs;
  for (const auto& c : columns) {
    const auto& f = schema.at(c);
    specs.push_back(&f);
    if (!f.continuous()) enc[c] = f.levels;
    ranges[c] = f.range;
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& f = *specs[c];
      auto it = records[r].values.find(f.acronym);
      if (it == records[r].values.end())
        throw Error(ErrorCode::EmptyCell, "EmptyCell: row " + std::to_string(r + 1) + ", " + f.acronym,
                    r + 1, {f.acronym});
      raw(r, c) = encode_value(f, it->second);
    }
  }
  std::vector<ColumnScaling> scaling;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto it = policy.find(columns[c]);
    ScalingMethod m = it == policy.end() ? ScalingMethod::None : it->second;
    ColumnScaling s{};
    if (m == ScalingMethod::ZScore) {
      s = NumericDataset::fit_zscore(raw.col(c));
    } else if (m == ScalingMethod::UnitInterval) {
      const auto& f = *specs[c];
      double lo = 0.0, hi = 1.0;
      if (f.continuous()) {
        lo = f.range.min;
        hi = f.range.max;
      } else {
        hi = static_cast<double>(f.levels.size() - 1);
      }
      s = {ScalingMethod::UnitInterval, lo, hi - lo};
    }
    scaling.push_back(s);
    for (Eigen::Index r = 0; r < raw.rows(); ++r) raw(r, c) = s.apply(raw(r, c));
  }
  return NumericDataset(std::move(raw), std::move(columns), std::move(scaling), std::move(enc),
                        std::move(ranges));
}

/// Encodes a single record with previously fitted scaling (no refit).
inline Vector encode_with(const StudentRecord& record, const FactorSchema& schema,
                          const std::vector<std::string>& columns,
                          const std::vector<ColumnScaling>& scaling) {
  Vector x(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& f = schema.at(columns[c]);
    x(c) = scaling[c].apply(encode_value(f, record.at(columns[c])));
  }
  return x;
}

struct SplitResult {
  NumericDataset train;
  NumericDataset test;
  std::vector<std::size_t> train_rows;  // indices into the input dataset
  std::vector<std::size_t> test_rows;
};

/// Seeded shuffle split. Scaling is refit on the training rows only and
/// the same parameters are applied to the test rows.
inline SplitResult train_test_split_indexed(const NumericDataset& ds, double test_fraction,
                                            std::uint64_t seed) {
  if (ds.rows() < 2) fail(ErrorCode::DegenerateSplit, "need at least 2 rows");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "test_fraction must lie in (0,1)");
  const auto n = ds.rows();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - test_fraction)));
  if (n_train == 0 || n_train >= n)
    fail(ErrorCode::DegenerateSplit, "split of " + std::to_string(n) + " rows leaves an empty side");
  Rng rng(seed);
  auto perm = rng.permutation(n);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<long>(n_train));
  std::vector<std::size_t> test_idx(perm.begin() + static_cast<long>(n_train), perm.end());
  auto train_unscaled = ds.select_rows(train_idx);
  auto scaling = train_unscaled.fitted_scaling();
  return {train_unscaled.rescaled(scaling), ds.select_rows(test_idx).rescaled(scaling),
          std::move(train_idx), std::move(test_idx)};
}

inline std::pair<NumericDataset, NumericDataset> train_test_split(const NumericDataset& ds,
                                                                  double test_fraction,
                                                                  std::uint64_t seed) {
  auto s = train_test_split_indexed(ds, test_fraction, seed);
  return {std::move(s.train), std::move(s.test)};
}

/// Reads a purely numeric CSV (header of column names) into an unscaled dataset.
inline NumericDataset load_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::MissingColumn, "empty CSV (no header row)");
  const auto header = csv::split_line(line);
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::Parse, "Parse: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(header.size()),
                  row, {});
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v)
        throw Error(ErrorCode::Parse, "Parse: row " + std::to_string(row) + ", column " + header[c] + " is not numeric",
                    row, {header[c]});
      values.push_back(*v);
    }
  }
  if (row == 0) fail(ErrorCode::EmptyData, "'" + path + "' has no data rows");
  Matrix m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < row; ++r)
    for (std::size_t c = 0; c < header.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * header.size() + c];
  return NumericDataset(std::move(m), header);
}

inline std::string to_numeric_csv(const NumericDataset& ds) {
  std::ostringstream out;
  for (std::size_t c = 0; c < ds.cols(); ++c) out << (c ? "," : "") << ds.columns()[c];
  out << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) out << (c ? "," : "") << format_number(ds.matrix()(r, c));
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const ColumnScaling& s) {
  return {{"method", to_string(s.method)}, {"offset", s.offset}, {"scale", s.scale}};
}

inline ColumnScaling column_scaling_from_json(const nlohmann::json& j) {
  return {scaling_method_from_string(j.at("method").get<std::string>()), j.at("offset").get<double>(),
          j.at("scale").get<double>()};
}

}  // namespace cgpa
