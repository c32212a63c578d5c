#pragma once

#include <chrono>
#include <functional>
#include <iostream>
#include <mutex>
#include <ostream>
#include <string>

#include <json.hpp>

// Eigen must be parsed before httplib: <resolv.h> defines a `_res` macro.
#include "cgpa/core/error.hpp"
#include "cgpa/service/service.hpp"

#include <httplib.h>

namespace cgpa {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationFailed:
    case ErrorCode::BadRating:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::UnknownLevel:
      return 400;
    case ErrorCode::BadCredentials:
    case ErrorCode::TokenExpired:
    case ErrorCode::TokenInvalid:
      return 401;
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::DuplicateEmail: return 409;
    case ErrorCode::InsufficientData: return 422;
    case ErrorCode::ModelUnavailable: return 503;
    default: return 500;
  }
}

/// Error body {code, message, fields?}; the message drops the "Code: " prefix.
inline nlohmann::json error_body(const Error& e) {
  std::string msg = e.what();
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  nlohmann::json j{{"code", to_string(e.code())}, {"message", msg}};
  if (!e.fields().empty()) j["fields"] = e.fields();
  return j;
}

/// JSON-over-HTTP front end for a PredictionService.
class HttpServer {
 public:
  explicit HttpServer(PredictionService& service, std::ostream* log = &std::cout) : service_(service), log_(log) {
    server_.new_task_queue = [n = service.config().threads] { return new httplib::ThreadPool(n); };
    routes();
    server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) { log_request(req, res); });
  }

  /// Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  /// Binds to an ephemeral port and returns it (negative on failure).
  int bind_any(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  using Handler = std::function<nlohmann::json(const httplib::Request&)>;

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      fail(ErrorCode::Parse, "request body is not valid JSON");
    }
  }

  static std::string string_field(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains(name) || !j[name].is_string())
      throw Error(ErrorCode::ValidationFailed, std::string("ValidationFailed: ") + name + " is required",
                  std::nullopt, {name});
    return j[name].get<std::string>();
  }

  Claims guard(const httplib::Request& req) const {
    return service_.authenticate(req.get_header_value("Authorization"));
  }

  void wrap(httplib::Response& res, const httplib::Request& req, const Handler& h, int ok_status = 200) {
    try {
      const auto body = h(req);
      res.status = ok_status;
      res.set_content(body.dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status(e.code());
      res.set_content(error_body(e).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(nlohmann::json{{"code", "Internal"}, {"message", e.what()}}.dump(), "application/json");
    }
  }

  void routes() {
    server_.Post("/api/register", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        const auto j = parse_body(r);
        return service_.register_user(string_field(j, "email"), string_field(j, "credential"));
      }, 201);
    });
    server_.Post("/api/login", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        const auto j = parse_body(r);
        return service_.login(string_field(j, "email"), string_field(j, "credential"));
      });
    });
    server_.Post("/api/predict", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        const auto who = guard(r);
        return service_.predict(who, parse_body(r));
      });
    });
    server_.Post("/api/feedback", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        const auto who = guard(r);
        return service_.feedback(who, parse_body(r));
      }, 201);
    });
    server_.Get("/api/model/info", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        (void)guard(r);
        return service_.model_info();
      });
    });
    server_.Post("/api/admin/retrain", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) { return service_.retrain(guard(r)); }, 201);
    });
    server_.Post("/api/admin/activate", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request& r) {
        const auto who = guard(r);
        const auto j = parse_body(r);
        if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
          throw Error(ErrorCode::ValidationFailed, "ValidationFailed: version is required", std::nullopt,
                      {"version"});
        return service_.activate(who, j["version"].get<int>());
      });
    });
    server_.Get("/api/schema", [this](const httplib::Request& req, httplib::Response& res) {
      wrap(res, req, [this](const httplib::Request&) { return service_.schema_json(); });
    });
    server_.set_pre_routing_handler([](const httplib::Request& req, httplib::Response& res) {
      res.set_header("X-Request-Start",
                     std::to_string(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count()));
      (void)req;
      return httplib::Server::HandlerResponse::Unhandled;
    });
  }

  void log_request(const httplib::Request& req, const httplib::Response& res) {
    if (!log_) return;
    double ms = 0.0;
    const auto start = res.get_header_value("X-Request-Start");
    if (!start.empty()) {
      const auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now().time_since_epoch())
                           .count();
      ms = static_cast<double>(now - std::stoll(start)) / 1000.0;
    }
    nlohmann::json line{{"ts", PredictionService::system_now()},
                        {"method", req.method},
                        {"path", req.path},
                        {"status", res.status},
                        {"duration_ms", ms},
                        {"remote", req.remote_addr}};
    if (res.status >= 400) {
      try {
        line["error"] = nlohmann::json::parse(res.body).value("code", "");
      } catch (...) {
      }
    }
    std::lock_guard lock(log_mu_);
    *log_ << line.dump() << '\n' << std::flush;
  }

  PredictionService& service_;
  std::ostream* log_;
  std::mutex log_mu_;
  httplib::Server server_;
};

}  // namespace cgpa
