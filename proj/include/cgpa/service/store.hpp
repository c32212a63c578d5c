#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "cgpa/core/error.hpp"

namespace cgpa {

struct UserRow {
  std::int64_t id = 0;
  std::string email;
  std::string credential_hash;
  std::string role;
  std::int64_t created_at = 0;
};

struct PredictionRow {
  std::int64_t id = 0;
  std::int64_t user_id = 0;
  std::string input_json;
  double predicted_cgpa = 0.0;
  std::string band;
  std::string attribution_json;
  std::string recommendations_json;
  int model_version = 0;
  std::int64_t created_at = 0;
};

struct FeedbackRow {
  std::int64_t id = 0;
  std::int64_t prediction_id = 0;
  std::int64_t user_id = 0;
  int rating = 0;
  std::optional<double> actual_cgpa;
  std::optional<std::string> comment;
  std::int64_t created_at = 0;
};

struct ArtifactRow {
  int version = 0;
  std::string path;
  std::string sha256;
  bool active = false;
  std::int64_t created_at = 0;
};

/// Embedded relational store (users, predictions, feedback, artifacts).
/// One connection; every public call holds the mutex, so writes are serialised.
class Store {
 public:
  explicit Store(const std::string& path) {
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "unknown error";
      sqlite3_close(db_);
      db_ = nullptr;
      fail(ErrorCode::Io, "cannot open store '" + path + "': " + msg);
    }
    exec("PRAGMA foreign_keys = ON");
    exec("PRAGMA journal_mode = WAL");
    exec(R"sql(
      CREATE TABLE IF NOT EXISTS users (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        email TEXT NOT NULL UNIQUE,
        credential_hash TEXT NOT NULL,
        role TEXT NOT NULL,
        created_at INTEGER NOT NULL);
      CREATE TABLE IF NOT EXISTS artifacts (
        version INTEGER PRIMARY KEY,
        path TEXT NOT NULL,
        sha256 TEXT NOT NULL,
        active INTEGER NOT NULL DEFAULT 0,
        created_at INTEGER NOT NULL);
      CREATE TABLE IF NOT EXISTS predictions (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        user_id INTEGER NOT NULL REFERENCES users(id),
        input_json TEXT NOT NULL,
        predicted_cgpa REAL NOT NULL,
        band TEXT NOT NULL,
        attribution_json TEXT NOT NULL,
        recommendations_json TEXT NOT NULL,
        model_version INTEGER NOT NULL REFERENCES artifacts(version),
        created_at INTEGER NOT NULL);
      CREATE TABLE IF NOT EXISTS feedback (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        prediction_id INTEGER NOT NULL REFERENCES predictions(id),
        user_id INTEGER NOT NULL REFERENCES users(id),
        rating INTEGER NOT NULL CHECK (rating BETWEEN 1 AND 5),
        actual_cgpa REAL,
        comment TEXT,
        created_at INTEGER NOT NULL);
    )sql");
  }

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  ~Store() { sqlite3_close(db_); }

  std::int64_t create_user(const std::string& email, const std::string& credential_hash, const std::string& role,
                           std::int64_t now) {
    std::lock_guard lock(mu_);
    Stmt s(db_, "INSERT INTO users(email, credential_hash, role, created_at) VALUES (?, ?, ?, ?)");
    s.bind(1, email).bind(2, credential_hash).bind(3, role).bind(4, now);
    const int rc = s.step();
    if (rc == SQLITE_CONSTRAINT) fail(ErrorCode::DuplicateEmail, "email already registered");
    check_done(rc);
    return sqlite3_last_insert_rowid(db_);
  }

  std::optional<UserRow> find_user(const std::string& email) {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT id, email, credential_hash, role, created_at FROM users WHERE email = ?");
    s.bind(1, email);
    if (s.step() != SQLITE_ROW) return std::nullopt;
    return UserRow{s.i64(0), s.text(1), s.text(2), s.text(3), s.i64(4)};
  }

  std::int64_t insert_prediction(const PredictionRow& p) {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO predictions(user_id, input_json, predicted_cgpa, band, attribution_json, "
           "recommendations_json, model_version, created_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
    s.bind(1, p.user_id).bind(2, p.input_json).bind(3, p.predicted_cgpa).bind(4, p.band);
    s.bind(5, p.attribution_json).bind(6, p.recommendations_json).bind(7, std::int64_t{p.model_version});
    s.bind(8, p.created_at);
    check_done(s.step());
    return sqlite3_last_insert_rowid(db_);
  }

  std::optional<PredictionRow> get_prediction(std::int64_t id) {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "SELECT id, user_id, input_json, predicted_cgpa, band, attribution_json, recommendations_json, "
           "model_version, created_at FROM predictions WHERE id = ?");
    s.bind(1, id);
    if (s.step() != SQLITE_ROW) return std::nullopt;
    return PredictionRow{s.i64(0),  s.i64(1),  s.text(2), s.real(3), s.text(4), s.text(5),
                         s.text(6), static_cast<int>(s.i64(7)), s.i64(8)};
  }

  std::int64_t insert_feedback(const FeedbackRow& f) {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO feedback(prediction_id, user_id, rating, actual_cgpa, comment, created_at) "
           "VALUES (?, ?, ?, ?, ?, ?)");
    s.bind(1, f.prediction_id).bind(2, f.user_id).bind(3, std::int64_t{f.rating});
    if (f.actual_cgpa) s.bind(4, *f.actual_cgpa);
    else s.bind_null(4);
    if (f.comment) s.bind(5, *f.comment);
    else s.bind_null(5);
    s.bind(6, f.created_at);
    check_done(s.step());
    return sqlite3_last_insert_rowid(db_);
  }

  std::int64_t feedback_count(bool labeled_only = false) {
    std::lock_guard lock(mu_);
    Stmt s(db_, labeled_only ? "SELECT COUNT(*) FROM feedback WHERE actual_cgpa IS NOT NULL"
                             : "SELECT COUNT(*) FROM feedback");
    s.step();
    return s.i64(0);
  }

  /// (stored input JSON, actual CGPA) for every feedback row carrying a CGPA.
  std::vector<std::pair<std::string, double>> labeled_feedback() {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "SELECT p.input_json, f.actual_cgpa FROM feedback f JOIN predictions p ON p.id = f.prediction_id "
           "WHERE f.actual_cgpa IS NOT NULL ORDER BY f.id");
    std::vector<std::pair<std::string, double>> out;
    while (s.step() == SQLITE_ROW) out.emplace_back(s.text(0), s.real(1));
    return out;
  }

  void insert_artifact(const ArtifactRow& a) {
    std::lock_guard lock(mu_);
    Stmt s(db_, "INSERT INTO artifacts(version, path, sha256, active, created_at) VALUES (?, ?, ?, 0, ?)");
    s.bind(1, std::int64_t{a.version}).bind(2, a.path).bind(3, a.sha256).bind(4, a.created_at);
    check_done(s.step());
  }

  std::optional<ArtifactRow> get_artifact(int version) {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT version, path, sha256, active, created_at FROM artifacts WHERE version = ?");
    s.bind(1, std::int64_t{version});
    if (s.step() != SQLITE_ROW) return std::nullopt;
    return ArtifactRow{static_cast<int>(s.i64(0)), s.text(1), s.text(2), s.i64(3) != 0, s.i64(4)};
  }

  std::vector<ArtifactRow> artifacts() {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT version, path, sha256, active, created_at FROM artifacts ORDER BY version");
    std::vector<ArtifactRow> out;
    while (s.step() == SQLITE_ROW)
      out.push_back({static_cast<int>(s.i64(0)), s.text(1), s.text(2), s.i64(3) != 0, s.i64(4)});
    return out;
  }

  /// Marks exactly one version active inside a transaction.
  void set_active(int version) {
    std::lock_guard lock(mu_);
    exec("BEGIN IMMEDIATE");
    try {
      exec("UPDATE artifacts SET active = 0");
      Stmt s(db_, "UPDATE artifacts SET active = 1 WHERE version = ?");
      s.bind(1, std::int64_t{version});
      check_done(s.step());
      exec("COMMIT");
    } catch (...) {
      exec("ROLLBACK");
      throw;
    }
  }

  std::optional<int> active_version() {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT version FROM artifacts WHERE active = 1");
    if (s.step() != SQLITE_ROW) return std::nullopt;
    return static_cast<int>(s.i64(0));
  }

  int max_version() {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT COALESCE(MAX(version), 0) FROM artifacts");
    s.step();
    return static_cast<int>(s.i64(0));
  }

 private:
  class Stmt {
   public:
    Stmt(sqlite3* db, const char* sql) : db_(db) {
      if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
        fail(ErrorCode::Io, std::string("store: ") + sqlite3_errmsg(db));
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int i, const std::string& v) {
      sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
      return *this;
    }
    Stmt& bind(int i, std::int64_t v) {
      sqlite3_bind_int64(stmt_, i, v);
      return *this;
    }
    Stmt& bind(int i, double v) {
      sqlite3_bind_double(stmt_, i, v);
      return *this;
    }
    Stmt& bind_null(int i) {
      sqlite3_bind_null(stmt_, i);
      return *this;
    }
    int step() {
      const int rc = sqlite3_step(stmt_);
      if (rc != SQLITE_ROW && rc != SQLITE_DONE && (rc & 0xff) != SQLITE_CONSTRAINT)
        fail(ErrorCode::Io, std::string("store: ") + sqlite3_errmsg(db_));
      return (rc & 0xff) == SQLITE_CONSTRAINT ? SQLITE_CONSTRAINT : rc;
    }
    std::int64_t i64(int c) const { return sqlite3_column_int64(stmt_, c); }
    double real(int c) const { return sqlite3_column_double(stmt_, c); }
    std::string text(int c) const {
      const auto* t = sqlite3_column_text(stmt_, c);
      return t ? std::string(reinterpret_cast<const char*>(t), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, c)))
               : std::string();
    }

   private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
  };

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      fail(ErrorCode::Io, "store: " + msg);
    }
  }

  void check_done(int rc) {
    if (rc == SQLITE_CONSTRAINT) fail(ErrorCode::InvalidArgument, std::string("store constraint: ") + sqlite3_errmsg(db_));
    if (rc != SQLITE_DONE) fail(ErrorCode::Io, std::string("store: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_ = nullptr;
  std::mutex mu_;
};

}  // namespace cgpa
