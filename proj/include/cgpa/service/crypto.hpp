#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "cgpa/core/error.hpp"

namespace cgpa::crypto {

inline std::string random_bytes(std::size_t n) {
  std::string out(n, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(out.data()), static_cast<int>(n)) != 1)
    fail(ErrorCode::Io, "random generator failure");
  return out;
}

/// Unpadded URL-safe base64.
inline std::string base64url_encode(std::string_view in) {
  std::string out(4 * ((in.size() + 2) / 3) + 1, '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  out.resize(static_cast<std::size_t>(len));
  while (!out.empty() && out.back() == '=') out.pop_back();
  for (auto& c : out) {
    if (c == '+') c = '-';
    else if (c == '/') c = '_';
  }
  return out;
}

inline std::string base64url_decode(std::string_view in) {
  std::string s(in);
  for (auto& c : s) {
    if (c == '-') c = '+';
    else if (c == '_') c = '/';
    else if (c == '+' || c == '/' || c == '=') fail(ErrorCode::TokenInvalid, "malformed encoding");
  }
  const std::size_t pad = (4 - s.size() % 4) % 4;
  if (pad == 3) fail(ErrorCode::TokenInvalid, "malformed encoding");
  s.append(pad, '=');
  std::string out(3 * s.size() / 4, '\0');
  const int len = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(s.data()), static_cast<int>(s.size()));
  if (len < 0) fail(ErrorCode::TokenInvalid, "malformed encoding");
  out.resize(static_cast<std::size_t>(len) - pad);
  return out;
}

inline std::string hmac_sha256(std::string_view key, std::string_view data) {
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), reinterpret_cast<const unsigned char*>(data.data()),
            data.size(), mac, &len))
    fail(ErrorCode::Io, "HMAC failure");
  return std::string(reinterpret_cast<const char*>(mac), len);
}

inline bool constant_time_equal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

inline std::string pbkdf2_sha256(std::string_view password, std::string_view salt, int iterations) {
  std::string out(32, '\0');
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt.data()), static_cast<int>(salt.size()), iterations,
                        EVP_sha256(), static_cast<int>(out.size()), reinterpret_cast<unsigned char*>(out.data())) != 1)
    fail(ErrorCode::Io, "PBKDF2 failure");
  return out;
}

/// "pbkdf2-sha256$<iterations>$<salt>$<hash>" with base64url fields.
inline std::string hash_credential(std::string_view credential, int iterations) {
  const auto salt = random_bytes(16);
  return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + base64url_encode(salt) + "$" +
         base64url_encode(pbkdf2_sha256(credential, salt, iterations));
}

inline bool verify_credential(std::string_view credential, std::string_view stored) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= stored.size(); ++i)
    if (i == stored.size() || stored[i] == '$') {
      parts.emplace_back(stored.substr(start, i - start));
      start = i + 1;
    }
  if (parts.size() != 4 || parts[0] != "pbkdf2-sha256") return false;
  try {
    const int iterations = std::stoi(parts[1]);
    const auto salt = base64url_decode(parts[2]);
    const auto expected = base64url_decode(parts[3]);
    return constant_time_equal(pbkdf2_sha256(credential, salt, iterations), expected);
  } catch (...) {
    return false;
  }
}

}  // namespace cgpa::crypto
