#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/core/hash.hpp"
#include "cgpa/data/default_sem.hpp"
#include "cgpa/data/record.hpp"
#include "cgpa/data/schema.hpp"
#include "cgpa/data/sem.hpp"
#include "cgpa/explain/domain.hpp"
#include "cgpa/explain/recommend.hpp"
#include "cgpa/explain/shapley.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/predict/pipeline.hpp"
#include "cgpa/service/auth.hpp"
#include "cgpa/service/config.hpp"
#include "cgpa/service/crypto.hpp"
#include "cgpa/service/store.hpp"

namespace cgpa {

/// An activated artifact. Immutable once published in the registry.
struct LoadedModel {
  int version = 0;
  Artifact artifact;
  nlohmann::json artifact_json;
  FeatureSpace space;
};

/// Holds the serving model. Readers take a snapshot; activation swaps the
/// pointer under a short lock, so a request sees exactly one version.
class ModelRegistry {
 public:
  std::shared_ptr<const LoadedModel> current() const {
    std::lock_guard lock(mu_);
    return model_;
  }
  void publish(std::shared_ptr<const LoadedModel> m) {
    std::lock_guard lock(mu_);
    model_ = std::move(m);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const LoadedModel> model_;
};

/// Service operations independent of the transport. Every method may throw
/// cgpa::Error; the HTTP layer maps codes to statuses.
class PredictionService {
 public:
  using Clock = std::function<std::int64_t()>;

  static std::int64_t system_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  explicit PredictionService(ServiceConfig cfg, Clock clock = system_now)
      : cfg_(std::move(cfg)),
        clock_(std::move(clock)),
        schema_(default_schema()),
        signer_(cfg_.secret.empty() ? crypto::base64url_encode(crypto::random_bytes(32)) : cfg_.secret, cfg_.token_ttl),
        store_(cfg_.store_path) {
    std::filesystem::create_directories(cfg_.artifact_dir);
    if (auto v = store_.active_version()) {
      registry_.publish(load_version(*v));
    } else {
      const int version = train_and_register(base_records());
      activate_version(version);
    }
  }

  const ServiceConfig& config() const { return cfg_; }
  const FactorSchema& schema() const { return schema_; }
  Store& store() { return store_; }
  std::shared_ptr<const LoadedModel> active_model() const { return registry_.current(); }

  nlohmann::json schema_json() const {
    auto j = to_json(schema_);
    j["target"] = std::string(FactorSchema::kTarget);
    j["cgpa_bands"] = cgpa_bands_json();
    return j;
  }

  nlohmann::json register_user(const std::string& email, const std::string& credential) {
    std::vector<std::string> bad;
    if (!valid_email(email)) bad.push_back("email");
    if (credential.size() < 8) bad.push_back("credential");
    if (!bad.empty()) {
      std::string msg = "ValidationFailed:";
      for (const auto& b : bad) msg += " " + b;
      throw Error(ErrorCode::ValidationFailed, msg + " (valid email and a credential of >= 8 characters required)",
                  std::nullopt, bad);
    }
    const auto role = cfg_.admin_emails.count(email) ? "admin" : "user";
    const auto id = store_.create_user(email, crypto::hash_credential(credential, cfg_.pbkdf2_iterations), role, now());
    return {{"user_id", id}, {"role", role}};
  }

  nlohmann::json login(const std::string& email, const std::string& credential) {
    const auto user = store_.find_user(email);
    // Unknown email and wrong credential are indistinguishable to the caller.
    if (!user || !crypto::verify_credential(credential, user->credential_hash))
      fail(ErrorCode::BadCredentials, "email or credential is incorrect");
    const auto t = now();
    return {{"token", signer_.issue(user->id, user->role, t)},
            {"token_type", "Bearer"},
            {"expires_at", t + signer_.ttl()},
            {"user_id", user->id},
            {"role", user->role}};
  }

  /// Accepts a raw Authorization header value ("Bearer <token>").
  Claims authenticate(const std::string& authorization) const {
    static constexpr std::string_view kPrefix = "Bearer ";
    if (authorization.size() <= kPrefix.size() || authorization.compare(0, kPrefix.size(), kPrefix) != 0)
      fail(ErrorCode::TokenInvalid, "missing bearer token");
    return signer_.verify(std::string_view(authorization).substr(kPrefix.size()), now());
  }

  nlohmann::json predict(const Claims& who, const nlohmann::json& input) {
    const auto model = registry_.current();
    if (!model) fail(ErrorCode::ModelUnavailable, "no active model");
    StudentRecord record = record_from_json(strip_target(input), schema_, {std::string(FactorSchema::kTarget)});
    const auto out = evaluate(*model, record);

    PredictionRow row;
    row.user_id = who.user_id;
    row.input_json = to_json(record).dump();
    row.predicted_cgpa = out.cgpa;
    row.band = out.band;
    row.attribution_json = out.attribution.dump();
    row.recommendations_json = out.recommendations.dump();
    row.model_version = model->version;
    row.created_at = now();
    const auto id = store_.insert_prediction(row);
    return prediction_json(id, row, out.unit_prediction);
  }

  nlohmann::json feedback(const Claims& who, const nlohmann::json& body) {
    std::int64_t prediction_id = 0;
    FeedbackRow f;
    try {
      prediction_id = body.at("prediction_id").get<std::int64_t>();
      if (!body.at("rating").is_number_integer()) fail(ErrorCode::BadRating, "rating must be an integer in 1..5");
      f.rating = body.at("rating").get<int>();
      if (body.contains("actual_cgpa") && !body["actual_cgpa"].is_null())
        f.actual_cgpa = body["actual_cgpa"].get<double>();
      if (body.contains("comment") && !body["comment"].is_null()) f.comment = body["comment"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::ValidationFailed, "ValidationFailed: feedback needs prediction_id and rating",
                  std::nullopt, {"prediction_id", "rating"});
    }
    const auto p = store_.get_prediction(prediction_id);
    if (!p) fail(ErrorCode::NotFound, "prediction " + std::to_string(prediction_id) + " does not exist");
    if (p->user_id != who.user_id) fail(ErrorCode::Forbidden, "prediction belongs to another user");
    if (f.rating < 1 || f.rating > 5) fail(ErrorCode::BadRating, "rating must be an integer in 1..5");
    if (f.actual_cgpa && !(*f.actual_cgpa >= 0.0 && *f.actual_cgpa <= 4.0))
      throw Error(ErrorCode::ValidationFailed, "ValidationFailed: actual_cgpa must lie in [0, 4]", std::nullopt,
                  {"actual_cgpa"});
    f.prediction_id = prediction_id;
    f.user_id = who.user_id;
    f.created_at = now();
    return {{"feedback_id", store_.insert_feedback(f)}};
  }

  nlohmann::json model_info() {
    const auto model = registry_.current();
    if (!model) fail(ErrorCode::ModelUnavailable, "no active model");
    nlohmann::json versions = nlohmann::json::array();
    for (const auto& a : store_.artifacts())
      versions.push_back({{"version", a.version}, {"active", a.active}, {"sha256", a.sha256}});
    return {{"active_version", model->version},
            {"model_kind", model->artifact_json.at("model_kind")},
            {"target", model->artifact_json.at("target")},
            {"schema_hash", model->artifact.schema_hash},
            {"training_metadata", model->artifact_json.at("training_metadata")},
            {"metrics", model->artifact_json.at("metrics")},
            {"feedback_count", store_.feedback_count()},
            {"labeled_feedback_count", store_.feedback_count(true)},
            {"versions", versions}};
  }

  nlohmann::json retrain(const Claims& who) {
    require_admin(who);
    std::lock_guard lock(retrain_mu_);
    auto records = base_records();
    const auto labeled = store_.labeled_feedback();
    for (const auto& [input, cgpa] : labeled) {
      auto r = record_from_json(nlohmann::json::parse(input), schema_, {std::string(FactorSchema::kTarget)});
      r.values[std::string(FactorSchema::kTarget)] = cgpa;
      for (std::size_t k = 0; k < cfg_.feedback_weight; ++k) records.push_back(r);
    }
    if (records.size() < cfg_.min_labeled_rows)
      fail(ErrorCode::InsufficientData, std::to_string(records.size()) + " labeled rows, need " +
                                            std::to_string(cfg_.min_labeled_rows));
    const int version = train_and_register(records, labeled.size());
    const auto art = load_version(version);
    return {{"version", version}, {"feedback_rows", labeled.size()}, {"metrics", art->artifact_json.at("metrics")}};
  }

  nlohmann::json activate(const Claims& who, int version) {
    require_admin(who);
    activate_version(version);
    return {{"active_version", version}};
  }

  /// Re-evaluates a stored prediction against the artifact that produced it.
  double replay_prediction(std::int64_t prediction_id) {
    const auto p = store_.get_prediction(prediction_id);
    if (!p) fail(ErrorCode::NotFound, "prediction " + std::to_string(prediction_id) + " does not exist");
    const auto model = load_version(p->model_version);
    const auto record = record_from_json(nlohmann::json::parse(p->input_json), schema_,
                                         {std::string(FactorSchema::kTarget)});
    return to_cgpa(model->artifact, model->artifact.predict_encoded(model->artifact.encode(record, schema_)));
  }

 private:
  struct Evaluation {
    double unit_prediction = 0.0;
    double cgpa = 0.0;
    std::string band;
    nlohmann::json attribution;
    nlohmann::json recommendations;
  };

  static nlohmann::json strip_target(const nlohmann::json& input) {
    if (!input.is_object()) return input;
    auto j = input;
    j.erase(std::string(FactorSchema::kTarget));
    return j;
  }

  static double to_cgpa(const Artifact& a, double unit) {
    return std::clamp(a.target_scaling.invert(std::clamp(unit, 0.0, 1.0)), 0.0, 4.0);
  }

  Evaluation evaluate(const LoadedModel& m, const StudentRecord& record) const {
    const auto& a = m.artifact;
    const Eigen::VectorXd x = a.encode(record, schema_);
    const ModelFn f = [&a](const Eigen::VectorXd& z) { return a.predict_encoded(z); };
    Attribution attr;
    if (const auto* lin = std::get_if<LinearModel>(&a.model))
      attr = shapley_exact_linear(*lin, x, a.background_mean);
    else
      attr = shapley_sampled(f, x, a.background_mean, cfg_.shapley_samples, cfg_.train.spec.seed);

    std::vector<std::string> raw;
    for (const auto& name : a.features) raw.push_back(to_text(record.at(name)));
    const auto recs = recommend(attr, f, x, m.space, actionable_factors(a.features), cfg_.n_recommendations);
    auto rec_json = to_json(recs);
    // Express sweep targets in survey terms as well as model units.
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& spec = schema_.at(recs[i].feature);
      const auto& s = a.scaling[recs[i].index];
      const double code = s.invert(recs[i].target_value);
      if (spec.continuous())
        rec_json[i]["target_raw"] = format_number(std::round(code * 100.0) / 100.0);
      else
        rec_json[i]["target_raw"] = spec.levels.at(static_cast<std::size_t>(std::llround(code)));
    }

    Evaluation e;
    e.unit_prediction = attr.prediction;
    e.cgpa = to_cgpa(a, attr.prediction);
    e.band = bin_cgpa(e.cgpa).label;
    e.attribution = to_json(attr, a.features, raw);
    e.recommendations = std::move(rec_json);
    return e;
  }

  static nlohmann::json prediction_json(std::int64_t id, const PredictionRow& row, double unit) {
    return {{"prediction_id", id},
            {"predicted_cgpa", row.predicted_cgpa},
            {"unit_prediction", unit},
            {"band", row.band},
            {"model_version", row.model_version},
            {"attribution", nlohmann::json::parse(row.attribution_json)},
            {"recommendations", nlohmann::json::parse(row.recommendations_json)},
            {"input", nlohmann::json::parse(row.input_json)},
            {"created_at", row.created_at}};
  }

  void require_admin(const Claims& who) const {
    if (!who.is_admin()) fail(ErrorCode::Forbidden, "administrator role required");
  }

  std::int64_t now() const { return clock_(); }

  std::vector<StudentRecord> base_records() const {
    if (!cfg_.base_csv.empty()) return load_csv(cfg_.base_csv, schema_);
    auto spec = default_sem_spec();
    spec.seed = cfg_.synthetic_seed;
    return generate_synthetic(spec, cfg_.synthetic_rows, &schema_).records;
  }

  std::filesystem::path artifact_path(int version) const {
    return std::filesystem::path(cfg_.artifact_dir) / ("model_v" + std::to_string(version) + ".json");
  }

  int train_and_register(const std::vector<StudentRecord>& records, std::size_t feedback_rows = 0) {
    Artifact a = train_pipeline(records, schema_, cfg_.train);
    const int version = store_.max_version() + 1;
    a.version = version;
    a.extra_metadata = {{"feedback_rows", feedback_rows},
                        {"feedback_weight", cfg_.feedback_weight},
                        {"corpus_rows", records.size()}};
    const auto path = artifact_path(version);
    save_artifact(a, path);
    store_.insert_artifact({version, path.string(), sha256_hex(to_json(a).dump()), false, now()});
    return version;
  }

  std::shared_ptr<const LoadedModel> load_version(int version) const {
    const auto row = store_.get_artifact(version);
    if (!row) fail(ErrorCode::NotFound, "model version " + std::to_string(version) + " does not exist");
    const auto j = read_artifact_json(row->path);
    if (sha256_hex(j.dump()) != row->sha256)
      fail(ErrorCode::ArtifactCorrupt, "artifact for version " + std::to_string(version) + " does not match its record");
    auto m = std::make_shared<LoadedModel>();
    m->version = version;
    try {
      m->artifact = artifact_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ArtifactCorrupt, std::string("malformed artifact: ") + e.what());
    }
    if (m->artifact.schema_hash != schema_hash(schema_))
      fail(ErrorCode::ArtifactCorrupt, "artifact schema differs from the service schema");
    if (m->artifact.config.target != TargetKind::Regression)
      fail(ErrorCode::ArtifactCorrupt, "served artifacts must predict unit-scaled CGPA");
    m->artifact_json = j;
    m->space = artifact_feature_space(m->artifact, schema_);
    return m;
  }

  void activate_version(int version) {
    std::lock_guard lock(activate_mu_);
    auto m = load_version(version);
    store_.set_active(version);
    registry_.publish(std::move(m));
  }

  ServiceConfig cfg_;
  Clock clock_;
  FactorSchema schema_;
  TokenSigner signer_;
  mutable Store store_;
  ModelRegistry registry_;
  std::mutex retrain_mu_;
  std::mutex activate_mu_;
};

}  // namespace cgpa
