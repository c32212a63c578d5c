#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/predict/pipeline.hpp"

namespace cgpa {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string secret;  // empty: a random per-process secret is generated
  std::string store_path = "cgpa.db";
  std::string artifact_dir = "artifacts";
  std::int64_t token_ttl = 24 * 3600;
  int pbkdf2_iterations = 20000;
  std::set<std::string> admin_emails;

  // Retraining corpus: a CSV if given, otherwise the default synthetic SEM.
  std::string base_csv;
  std::size_t synthetic_rows = 2000;
  std::uint64_t synthetic_seed = 20240601;
  std::size_t min_labeled_rows = 100;
  std::size_t feedback_weight = 1;  // replication count of each labeled feedback row

  TrainConfig train{};
  std::size_t shapley_samples = 256;
  std::size_t n_recommendations = 3;
  std::size_t threads = 8;
};

inline ServiceConfig service_config_from_json(const nlohmann::json& j) {
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.secret = j.value("secret", c.secret);
    c.store_path = j.value("store_path", c.store_path);
    c.artifact_dir = j.value("artifact_dir", c.artifact_dir);
    c.token_ttl = j.value("token_ttl_seconds", c.token_ttl);
    c.pbkdf2_iterations = j.value("pbkdf2_iterations", c.pbkdf2_iterations);
    if (j.contains("admin_emails")) c.admin_emails = j.at("admin_emails").get<std::set<std::string>>();
    c.base_csv = j.value("base_csv", c.base_csv);
    c.synthetic_rows = j.value("synthetic_rows", c.synthetic_rows);
    c.synthetic_seed = j.value("synthetic_seed", c.synthetic_seed);
    c.min_labeled_rows = j.value("min_labeled_rows", c.min_labeled_rows);
    c.feedback_weight = j.value("feedback_weight", c.feedback_weight);
    c.shapley_samples = j.value("shapley_samples", c.shapley_samples);
    c.n_recommendations = j.value("n_recommendations", c.n_recommendations);
    c.threads = j.value("threads", c.threads);
    c.train.spec.kind = model_kind_from_string(j.value("model", std::string("ridge")));
    c.train.spec.lambda = j.value("lambda", c.train.spec.lambda);
    c.train.spec.mix = j.value("mix", c.train.spec.mix);
    c.train.spec.seed = j.value("seed", c.train.spec.seed);
    c.train.seed = j.value("split_seed", c.train.seed);
    c.train.test_fraction = j.value("test_fraction", c.train.test_fraction);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("service config: ") + e.what());
  }
  if (c.train.spec.is_classifier())
    fail(ErrorCode::InvalidArgument, "service config: the served model must be a regressor");
  if (c.feedback_weight < 1) fail(ErrorCode::InvalidArgument, "service config: feedback_weight must be >= 1");
  return c;
}

/// CGPA_PORT, CGPA_SECRET, CGPA_STORE and CGPA_ARTIFACTS override the file.
inline void apply_env_overrides(ServiceConfig& c) {
  if (const char* v = std::getenv("CGPA_PORT")) {
    try {
      c.port = std::stoi(v);
    } catch (...) {
      fail(ErrorCode::InvalidArgument, "CGPA_PORT is not a number");
    }
  }
  if (const char* v = std::getenv("CGPA_SECRET")) c.secret = v;
  if (const char* v = std::getenv("CGPA_STORE")) c.store_path = v;
  if (const char* v = std::getenv("CGPA_ARTIFACTS")) c.artifact_dir = v;
}

inline ServiceConfig load_service_config(const std::string& path) {
  ServiceConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::NotFound, "config " + path + " not found");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      c = service_config_from_json(nlohmann::json::parse(ss.str()));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::Parse, "config " + path + ": " + e.what());
    }
  }
  apply_env_overrides(c);
  return c;
}

}  // namespace cgpa
