#pragma once

#include <cstdint>
#include <regex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cgpa/core/error.hpp"
#include "cgpa/service/crypto.hpp"

namespace cgpa {

struct Claims {
  std::int64_t user_id = 0;
  std::string role;  // "user" or "admin"
  std::int64_t issued_at = 0;
  std::int64_t expires_at = 0;
  bool is_admin() const { return role == "admin"; }
};

inline bool valid_email(std::string_view email) {
  static const std::regex re(R"(^[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)+$)");
  return email.size() <= 254 && std::regex_match(email.begin(), email.end(), re);
}

/// Bearer tokens of the form base64url(payload) "." base64url(HMAC-SHA256(secret, payload part)).
class TokenSigner {
 public:
  TokenSigner(std::string secret, std::int64_t ttl_seconds) : secret_(std::move(secret)), ttl_(ttl_seconds) {
    if (secret_.size() < 16) fail(ErrorCode::InvalidArgument, "token secret must have at least 16 characters");
  }

  std::string issue(std::int64_t user_id, const std::string& role, std::int64_t now) const {
    const nlohmann::json payload{{"uid", user_id}, {"role", role}, {"iat", now}, {"exp", now + ttl_}};
    const auto body = crypto::base64url_encode(payload.dump());
    return body + "." + crypto::base64url_encode(crypto::hmac_sha256(secret_, body));
  }

  Claims verify(std::string_view token, std::int64_t now) const {
    const auto dot = token.find('.');
    if (token.empty() || dot == std::string_view::npos || token.find('.', dot + 1) != std::string_view::npos)
      fail(ErrorCode::TokenInvalid, "malformed token");
    const auto body = token.substr(0, dot);
    const auto sig = token.substr(dot + 1);
    // Compare the encoded forms so non-canonical encodings of the same bytes are rejected too.
    if (!crypto::constant_time_equal(crypto::base64url_encode(crypto::hmac_sha256(secret_, body)), sig))
      fail(ErrorCode::TokenInvalid, "token signature mismatch");
    Claims c;
    try {
      const auto payload = nlohmann::json::parse(crypto::base64url_decode(body));
      c.user_id = payload.at("uid").get<std::int64_t>();
      c.role = payload.at("role").get<std::string>();
      c.issued_at = payload.at("iat").get<std::int64_t>();
      c.expires_at = payload.at("exp").get<std::int64_t>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::TokenInvalid, "malformed token payload");
    }
    if (now >= c.expires_at) fail(ErrorCode::TokenExpired, "token expired");
    return c;
  }

  std::int64_t ttl() const { return ttl_; }

 private:
  std::string secret_;
  std::int64_t ttl_;
};

}  // namespace cgpa
