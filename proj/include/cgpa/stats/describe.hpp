#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/data/record.hpp"

namespace cgpa {

struct ColumnSummary {
  std::string column;
  std::size_t count = 0;
  std::size_t unique = 0;
  double mode = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
};

/// Per-column summary of the dataset's stored (scaled) values.
/// Mode ties go to the value seen first.
inline std::vector<ColumnSummary> describe(const NumericDataset& ds) {
  if (ds.rows() == 0) fail(ErrorCode::EmptyData, "describe on an empty dataset");
  std::vector<ColumnSummary> out;
  const auto& m = ds.matrix();
  const auto n = ds.rows();
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    ColumnSummary s;
    s.column = ds.columns()[c];
    s.count = n;
    std::unordered_map<double, std::size_t> counts;
    double sum = 0.0;
    s.min = s.max = m(0, c);
    for (std::size_t r = 0; r < n; ++r) {
      const double v = m(r, c);
      ++counts[v];
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    std::size_t best = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (const auto k = counts[m(r, c)]; k > best) {
        best = k;
        s.mode = m(r, c);
      }
    s.unique = counts.size();
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (m(r, c) - s.mean) * (m(r, c) - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    out.push_back(s);
  }
  return out;
}

/// Table-2 style row computed on raw records.
struct FactorReport {
  std::string acronym;
  std::size_t non_null = 0;
  std::size_t unique = 0;
  std::string most_frequent;
};

/// Non-null count, unique count and modal raw value per schema factor.
/// Mode ties go to the value seen first.
inline std::vector<FactorReport> validation_report(const std::vector<StudentRecord>& records,
                                                   const FactorSchema& schema) {
  std::vector<FactorReport> out;
  for (const auto& f : schema.factors()) {
    FactorReport rep{f.acronym, 0, 0, ""};
    std::unordered_map<std::string, std::size_t> counts;
    std::vector<std::string> order;
    for (const auto& r : records) {
      auto it = r.values.find(f.acronym);
      if (it == r.values.end()) continue;
      ++rep.non_null;
      auto text = to_text(it->second);
      if (++counts[text] == 1) order.push_back(text);
    }
    std::size_t best = 0;
    for (const auto& v : order)
      if (counts[v] > best) {
        best = counts[v];
        rep.most_frequent = v;
      }
    rep.unique = counts.size();
    out.push_back(std::move(rep));
  }
  return out;
}

struct CrosstabCell {
  std::size_t count = 0;
  double row_pct = 0.0;
  double col_pct = 0.0;
  double total_pct = 0.0;
};

struct CrosstabReport {
  std::string row_factor;
  std::string col_factor;
  std::vector<std::string> row_levels;  // observed levels, declared order
  std::vector<std::string> col_levels;
  std::vector<std::vector<CrosstabCell>> cells;
  std::size_t n = 0;
};

/// Contingency table of two non-continuous factors with row-, column- and
/// total-normalised percentages.
inline CrosstabReport crosstab(const NumericDataset& ds, std::string_view row_factor,
                               std::string_view col_factor) {
  for (auto f : {row_factor, col_factor})
    if (!ds.is_categorical(f))
      fail(ErrorCode::ContinuousFactor, "'" + std::string(f) + "' is continuous; crosstab needs levels");
  const auto rc = ds.column_index(row_factor), cc = ds.column_index(col_factor);
  const auto& rl = ds.encoding_map().at(std::string(row_factor));
  const auto& cl = ds.encoding_map().at(std::string(col_factor));
  const auto& rs = ds.scaling()[rc];
  const auto& cs = ds.scaling()[cc];

  std::vector<std::vector<std::size_t>> counts(rl.size(), std::vector<std::size_t>(cl.size(), 0));
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto a = static_cast<long>(std::llround(rs.invert(ds.matrix()(r, rc))));
    auto b = static_cast<long>(std::llround(cs.invert(ds.matrix()(r, cc))));
    if (a < 0 || b < 0 || a >= static_cast<long>(rl.size()) || b >= static_cast<long>(cl.size()))
      fail(ErrorCode::UnknownLevel, "code outside declared levels");
    ++counts[a][b];
  }
  std::vector<std::size_t> rows_used, cols_used;
  for (std::size_t a = 0; a < rl.size(); ++a) {
    std::size_t s = 0;
    for (auto v : counts[a]) s += v;
    if (s) rows_used.push_back(a);
  }
  for (std::size_t b = 0; b < cl.size(); ++b) {
    std::size_t s = 0;
    for (std::size_t a = 0; a < rl.size(); ++a) s += counts[a][b];
    if (s) cols_used.push_back(b);
  }

  CrosstabReport rep;
  rep.row_factor = row_factor;
  rep.col_factor = col_factor;
  rep.n = ds.rows();
  for (auto a : rows_used) rep.row_levels.push_back(rl[a]);
  for (auto b : cols_used) rep.col_levels.push_back(cl[b]);
  std::vector<std::size_t> row_tot(rows_used.size(), 0), col_tot(cols_used.size(), 0);
  for (std::size_t i = 0; i < rows_used.size(); ++i)
    for (std::size_t j = 0; j < cols_used.size(); ++j) {
      row_tot[i] += counts[rows_used[i]][cols_used[j]];
      col_tot[j] += counts[rows_used[i]][cols_used[j]];
    }
  const double n = static_cast<double>(rep.n);
  rep.cells.assign(rows_used.size(), std::vector<CrosstabCell>(cols_used.size()));
  for (std::size_t i = 0; i < rows_used.size(); ++i)
    for (std::size_t j = 0; j < cols_used.size(); ++j) {
      auto& cell = rep.cells[i][j];
      cell.count = counts[rows_used[i]][cols_used[j]];
      const double c = static_cast<double>(cell.count);
      cell.row_pct = 100.0 * c / static_cast<double>(row_tot[i]);
      cell.col_pct = 100.0 * c / static_cast<double>(col_tot[j]);
      cell.total_pct = 100.0 * c / n;
    }
  return rep;
}

inline nlohmann::json to_json(const ColumnSummary& s) {
  return {{"column", s.column}, {"count", s.count}, {"unique", s.unique}, {"mode", s.mode},
          {"mean", s.mean},     {"sd", s.sd},       {"min", s.min},       {"max", s.max}};
}

inline nlohmann::json to_json(const FactorReport& r) {
  return {{"factor", r.acronym}, {"non_null", r.non_null}, {"unique", r.unique}, {"most_frequent", r.most_frequent}};
}

inline nlohmann::json to_json(const CrosstabReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& row : r.cells) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row)
      jr.push_back({{"count", c.count}, {"row_pct", c.row_pct}, {"col_pct", c.col_pct}, {"total_pct", c.total_pct}});
    cells.push_back(std::move(jr));
  }
  return {{"row_factor", r.row_factor}, {"col_factor", r.col_factor}, {"row_levels", r.row_levels},
          {"col_levels", r.col_levels}, {"n", r.n}, {"cells", cells}};
}

/// Aligned text rendering: "count (total%)" per cell.
inline std::string format_crosstab(const CrosstabReport& r) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{r.row_factor + " \\ " + r.col_factor};
  head.insert(head.end(), r.col_levels.begin(), r.col_levels.end());
  grid.push_back(head);
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    std::vector<std::string> line{r.row_levels[i]};
    for (const auto& c : r.cells[i]) {
      std::ostringstream s;
      s << c.count << " (" << std::fixed << std::setprecision(2) << c.total_pct << "%)";
      line.push_back(s.str());
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : grid)
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
  std::ostringstream out;
  for (const auto& line : grid) {
    for (std::size_t k = 0; k < line.size(); ++k)
      out << std::left << std::setw(static_cast<int>(width[k] + 2)) << line[k];
    out << '\n';
  }
  return out.str();
}

}  // namespace cgpa
