#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/hash.hpp"

namespace cgpa {

enum class FactorKind { Continuous, Ordinal, Categorical, Binary };

inline std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Continuous: return "continuous";
    case FactorKind::Ordinal: return "ordinal";
    case FactorKind::Categorical: return "categorical";
    case FactorKind::Binary: return "binary";
  }
  return "continuous";
}

inline FactorKind factor_kind_from_string(std::string_view s) {
  if (s == "continuous") return FactorKind::Continuous;
  if (s == "ordinal") return FactorKind::Ordinal;
  if (s == "categorical") return FactorKind::Categorical;
  if (s == "binary") return FactorKind::Binary;
  fail(ErrorCode::Parse, "unknown factor kind '" + std::string(s) + "'");
}

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const Range&) const = default;
};

struct FactorSpec {
  std::string acronym;
  std::string name;
  FactorKind kind = FactorKind::Continuous;
  std::vector<std::string> levels;  // declared order; empty for continuous
  Range range;                      // continuous only
  std::string units;

  bool continuous() const { return kind == FactorKind::Continuous; }

  std::optional<std::size_t> level_index(std::string_view value) const {
    auto it = std::find(levels.begin(), levels.end(), value);
    if (it == levels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
  }

  bool operator==(const FactorSpec&) const = default;
};

/// Ordered survey schema. The target factor is always CGPA.
class FactorSchema {
 public:
  FactorSchema() = default;
  explicit FactorSchema(std::vector<FactorSpec> factors) : factors_(std::move(factors)) {
    validate();
  }

  const std::vector<FactorSpec>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  const FactorSpec* find(std::string_view acronym) const {
    for (const auto& f : factors_)
      if (f.acronym == acronym) return &f;
    return nullptr;
  }

  const FactorSpec& at(std::string_view acronym) const {
    if (const auto* f = find(acronym)) return *f;
    fail(ErrorCode::UnknownColumn, "factor '" + std::string(acronym) + "' not in schema");
  }

  std::optional<std::size_t> index_of(std::string_view acronym) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].acronym == acronym) return i;
    return std::nullopt;
  }

  std::vector<std::string> acronyms() const {
    std::vector<std::string> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.acronym);
    return out;
  }

  /// Every acronym except the prediction target, in schema order.
  std::vector<std::string> feature_acronyms() const {
    std::vector<std::string> out;
    for (const auto& f : factors_)
      if (f.acronym != kTarget) out.push_back(f.acronym);
    return out;
  }

  bool operator==(const FactorSchema&) const = default;

  static constexpr std::string_view kTarget = "CGPA";

 private:
  void validate() const {
    std::set<std::string> seen;
    for (const auto& f : factors_) {
      if (f.acronym.empty()) fail(ErrorCode::InvalidArgument, "empty factor acronym");
      if (!seen.insert(f.acronym).second)
        fail(ErrorCode::InvalidArgument, "duplicate factor acronym '" + f.acronym + "'");
      if (f.continuous()) {
        if (!(f.range.min < f.range.max))
          fail(ErrorCode::InvalidArgument, "factor '" + f.acronym + "' has an empty range");
      } else {
        if (f.levels.size() < 2)
          fail(ErrorCode::InvalidArgument, "factor '" + f.acronym + "' needs at least 2 levels");
        std::set<std::string> lv(f.levels.begin(), f.levels.end());
        if (lv.size() != f.levels.size())
          fail(ErrorCode::InvalidArgument, "factor '" + f.acronym + "' has duplicate levels");
      }
    }
  }

  std::vector<FactorSpec> factors_;
};

/// Acronyms of the 23 survey factors in canonical order.
inline const std::vector<std::string>& survey_acronyms() {
  static const std::vector<std::string> kAcronyms = {
      "DI", "YS", "G",  "SSC", "HSC", "FE", "ME", "FJ", "MJ",  "MI", "AC",  "SH",
      "IF", "GS", "S",  "PI",  "HS",  "PSR", "C", "RS", "CS", "SCI", "CGPA"};
  return kAcronyms;
}

/// Survey schema with the declared level orders used for ordinal encoding.
/// Ordinal bands are listed low to high. Categorical levels have no natural
/// order; they are listed alphabetically.
inline FactorSchema default_schema() {
  using K = FactorKind;
  auto cat = [](std::string a, std::string n, K k, std::vector<std::string> lv) {
    return FactorSpec{std::move(a), std::move(n), k, std::move(lv), {}, ""};
  };
  auto cont = [](std::string a, std::string n, double lo, double hi, std::string u) {
    return FactorSpec{std::move(a), std::move(n), K::Continuous, {}, {lo, hi}, std::move(u)};
  };
  std::vector<FactorSpec> f;
  f.push_back(cat("DI", "Department/Institute", K::Categorical,
                  {"Accounting", "Architecture", "Bangla", "Biochemistry", "Botany", "CSE",
                   "Chemistry", "Economics", "English", "IIT", "Law", "Mathematics",
                   "Pharmacy", "Physics", "Statistics", "Zoology"}));
  f.push_back(cat("YS", "Year/Semester", K::Ordinal,
                  {"1.0", "1.5", "2.0", "2.5", "3.0", "3.5", "4.0", "4.5", "5.0", "5.5"}));
  f.push_back(cat("G", "Gender", K::Binary, {"Female", "Male"}));
  f.push_back(cont("SSC", "S.S.C Result (GPA)", 1.0, 5.0, "GPA"));
  f.push_back(cont("HSC", "H.S.C Result (GPA)", 1.0, 5.0, "GPA"));
  f.push_back(cont("FE", "Father Education", 0.0, 25.0, "years"));
  f.push_back(cont("ME", "Mother Education", 0.0, 25.0, "years"));
  f.push_back(cat("FJ", "Father Job", K::Categorical,
                  {"Business", "Day labourer", "Farmer", "Govt. job", "Private job", "Retired",
                   "Unemployed"}));
  f.push_back(cat("MJ", "Mother Job", K::Categorical,
                  {"Business", "Govt. job", "Housewife", "Private job", "Unemployed"}));
  f.push_back(cat("MI", "Major Illness", K::Binary, {"No", "Yes"}));
  f.push_back(cat("AC", "Attendance in Class", K::Ordinal, {"0-50%", "50-75%", "75-100%"}));
  f.push_back(cat("SH", "Study Hour (in a week)", K::Ordinal,
                  {"0-3 hours", "3-9 hours", "9-15 hours", "15+ hours"}));
  f.push_back(cat("IF", "Internet Facilities", K::Ordinal, {"Not available", "Limited", "Available"}));
  f.push_back(cat("GS", "Group Study", K::Ordinal, {"Never", "Sometimes", "Participate"}));
  f.push_back(cat("S", "Sport/Cultural Involvement", K::Binary, {"No", "Yes"}));
  f.push_back(cat("PI", "Political Involvement", K::Binary, {"No", "Yes"}));
  f.push_back(cat("HS", "Hostel Staying", K::Ordinal, {"Never", "Irregular", "Regular"}));
  f.push_back(cat("PSR", "Getting Any Scholarship", K::Binary, {"No", "Yes"}));
  f.push_back(cat("C", "Self-Income (in taka)", K::Ordinal,
                  {"None", "1-3000", "3000-5000", "5000+"}));
  f.push_back(cat("RS", "Relational Status", K::Categorical, {"Married", "Relationship", "Single"}));
  f.push_back(cat("CS", "Communication Skill", K::Ordinal, {"Poor", "Average", "Good"}));
  f.push_back(cat("SCI", "Confidence", K::Ordinal,
                  {"Not confident", "Not enough confident", "Moderately confident", "Confident",
                   "Very confident"}));
  f.push_back(cont("CGPA", "Cumulative Grade Point Average", 0.0, 4.0, "GPA"));
  return FactorSchema(std::move(f));
}

inline nlohmann::json to_json(const FactorSchema& schema) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : schema.factors()) {
    nlohmann::json j{{"acronym", f.acronym}, {"name", f.name}, {"kind", to_string(f.kind)}};
    if (f.continuous()) {
      j["range"] = {f.range.min, f.range.max};
      j["units"] = f.units;
    } else {
      j["levels"] = f.levels;
    }
    factors.push_back(std::move(j));
  }
  return nlohmann::json{{"factors", std::move(factors)}};
}

inline FactorSchema schema_from_json(const nlohmann::json& j) {
  std::vector<FactorSpec> factors;
  try {
    for (const auto& jf : j.at("factors")) {
      FactorSpec f;
      f.acronym = jf.at("acronym").get<std::string>();
      f.name = jf.value("name", f.acronym);
      f.kind = factor_kind_from_string(jf.at("kind").get<std::string>());
      if (f.continuous()) {
        const auto& r = jf.at("range");
        f.range = {r.at(0).get<double>(), r.at(1).get<double>()};
        f.units = jf.value("units", "");
      } else {
        f.levels = jf.at("levels").get<std::vector<std::string>>();
      }
      factors.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("schema JSON: ") + e.what());
  }
  return FactorSchema(std::move(factors));
}

/// Stable fingerprint used to tie model artifacts to the schema they were trained on.
inline std::string schema_hash(const FactorSchema& schema) {
  return sha256_hex(to_json(schema).dump());
}

/// True when `schema` carries exactly the 23 survey acronyms with a [0,4] CGPA.
inline bool is_survey_schema(const FactorSchema& schema) {
  if (schema.size() != survey_acronyms().size()) return false;
  for (const auto& a : survey_acronyms())
    if (!schema.find(a)) return false;
  const auto& cgpa = schema.at("CGPA");
  return cgpa.continuous() && cgpa.range == Range{0.0, 4.0};
}

}  // namespace cgpa
