#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/data/schema.hpp"

namespace cgpa {

/// Raw survey value: a number for continuous factors, a level label otherwise.
using RawValue = std::variant<double, std::string>;

struct StudentRecord {
  std::map<std::string, RawValue> values;

  bool operator==(const StudentRecord&) const = default;

  const RawValue& at(const std::string& acronym) const {
    auto it = values.find(acronym);
    if (it == values.end()) fail(ErrorCode::MissingColumn, "record has no '" + acronym + "'");
    return it->second;
  }
};

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string to_text(const RawValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  return std::get<std::string>(v);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double out = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(out))
    return std::nullopt;
  return out;
}

/// Checks one value against its factor's declared domain.
inline bool in_domain(const FactorSpec& f, const RawValue& v) {
  if (f.continuous()) {
    const auto* d = std::get_if<double>(&v);
    return d && f.range.contains(*d);
  }
  const auto* s = std::get_if<std::string>(&v);
  return s && f.level_index(*s).has_value();
}

/// Parses raw text into a typed value for `f`; nullopt when out of domain.
inline std::optional<RawValue> parse_value(const FactorSpec& f, std::string_view text) {
  if (f.continuous()) {
    auto d = parse_number(text);
    if (!d || !f.range.contains(*d)) return std::nullopt;
    return RawValue{*d};
  }
  if (!f.level_index(text)) return std::nullopt;
  return RawValue{std::string(text)};
}

/// Returns the acronyms that are missing or out of domain, in schema order.
/// Acronyms in `skip` are not required.
inline std::vector<std::string> invalid_fields(const StudentRecord& r, const FactorSchema& schema,
                                               const std::set<std::string>& skip = {}) {
  std::vector<std::string> bad;
  for (const auto& f : schema.factors()) {
    if (skip.count(f.acronym)) continue;
    auto it = r.values.find(f.acronym);
    if (it == r.values.end() || !in_domain(f, it->second)) bad.push_back(f.acronym);
  }
  for (const auto& [k, v] : r.values)
    if (!schema.find(k) && !skip.count(k)) bad.push_back(k);
  return bad;
}

namespace csv {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace csv

inline std::vector<StudentRecord> parse_csv(std::istream& in, const FactorSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::MissingColumn, "empty CSV (no header row)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = csv::split_line(line);
  for (auto& h : header) {
    while (!h.empty() && h.back() == ' ') h.pop_back();
    while (!h.empty() && h.front() == ' ') h.erase(h.begin());
  }

  std::set<std::string> seen;
  for (const auto& h : header) {
    if (!schema.find(h))
      throw Error(ErrorCode::UnknownColumn, "UnknownColumn: header column '" + h + "'", 0, {h});
    if (!seen.insert(h).second)
      throw Error(ErrorCode::UnknownColumn, "UnknownColumn: duplicated header column '" + h + "'",
                  0, {h});
  }
  for (const auto& f : schema.factors())
    if (!seen.count(f.acronym))
      throw Error(ErrorCode::MissingColumn, "MissingColumn: header lacks '" + f.acronym + "'", 0,
                  {f.acronym});

  std::vector<const FactorSpec*> specs;
  for (const auto& h : header) specs.push_back(schema.find(h));

  std::vector<StudentRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    auto cells = csv::split_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::Parse,
                  "Parse: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()),
                  row, {});
    StudentRecord rec;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& f = *specs[c];
      std::string_view cell = cells[c];
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      if (cell.empty())
        throw Error(ErrorCode::EmptyCell,
                    "EmptyCell: row " + std::to_string(row) + ", column " + f.acronym, row,
                    {f.acronym});
      auto v = parse_value(f, cell);
      if (!v)
        throw Error(ErrorCode::ValueOutOfDomain,
                    "ValueOutOfDomain: row " + std::to_string(row) + ", column " + f.acronym +
                        ", value '" + std::string(cell) + "'",
                    row, {f.acronym});
      rec.values.emplace(f.acronym, std::move(*v));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// Reads survey records; header must carry exactly the schema acronyms (any order).
inline std::vector<StudentRecord> load_csv(const std::string& path, const FactorSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_csv(in, schema);
}

inline std::string to_csv(const std::vector<StudentRecord>& records, const FactorSchema& schema) {
  std::ostringstream out;
  const auto cols = schema.acronyms();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      out << (i ? "," : "") << csv::quote(to_text(r.at(cols[i])));
    out << '\n';
  }
  return out.str();
}

/// Keeps the first occurrence of every exact duplicate, preserving order.
inline std::vector<StudentRecord> deduplicate(const std::vector<StudentRecord>& records) {
  struct Key {
    std::size_t operator()(const StudentRecord& r) const {
      std::size_t h = 0;
      for (const auto& [k, v] : r.values) {
        h = h * 1315423911u ^ std::hash<std::string>{}(k);
        h = h * 2654435761u ^ std::hash<std::string>{}(to_text(v));
      }
      return h;
    }
  };
  std::unordered_set<StudentRecord, Key> seen;
  std::vector<StudentRecord> out;
  for (const auto& r : records)
    if (seen.insert(r).second) out.push_back(r);
  return out;
}

inline nlohmann::json to_json(const StudentRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : r.values) {
    if (const auto* d = std::get_if<double>(&v))
      j[k] = *d;
    else
      j[k] = std::get<std::string>(v);
  }
  return j;
}

/// Builds a record from a JSON object; values are typed by the schema.
/// Fields that fail to parse are reported together as ValidationFailed.
inline StudentRecord record_from_json(const nlohmann::json& j, const FactorSchema& schema,
                                      const std::set<std::string>& skip = {}) {
  if (!j.is_object()) throw Error(ErrorCode::ValidationFailed, "ValidationFailed: not an object");
  StudentRecord r;
  std::vector<std::string> bad;
  for (const auto& f : schema.factors()) {
    if (skip.count(f.acronym)) continue;
    if (!j.contains(f.acronym)) {
      bad.push_back(f.acronym);
      continue;
    }
    const auto& v = j.at(f.acronym);
    std::optional<RawValue> parsed;
    if (f.continuous()) {
      if (v.is_number()) {
        double d = v.get<double>();
        if (f.range.contains(d)) parsed = RawValue{d};
      } else if (v.is_string()) {
        parsed = parse_value(f, v.get<std::string>());
      }
    } else if (v.is_string()) {
      parsed = parse_value(f, v.get<std::string>());
    }
    if (parsed)
      r.values.emplace(f.acronym, std::move(*parsed));
    else
      bad.push_back(f.acronym);
  }
  for (const auto& [k, _] : j.items())
    if (!schema.find(k)) bad.push_back(k);
  if (!bad.empty()) {
    std::string msg = "ValidationFailed:";
    for (const auto& b : bad) msg += " " + b;
    throw Error(ErrorCode::ValidationFailed, msg, std::nullopt, bad);
  }
  return r;
}

}  // namespace cgpa
