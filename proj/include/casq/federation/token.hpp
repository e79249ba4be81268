// Copyright 2026 The casq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace casq::federation {

inline constexpr std::size_t kPublicKeyBytes = 32;
inline constexpr std::size_t kSecretKeyBytes = 64;
inline constexpr std::size_t kSeedBytes = 32;
inline constexpr std::size_t kSignatureBytes = 64;

using PublicKey = std::array<std::uint8_t, kPublicKeyBytes>;

// A node's signing identity and the peers it trusts. A node always trusts
// its own key.
class NodeIdentity {
 public:
  // Deterministic key pair from a 32-byte seed.
  static NodeIdentity from_seed(std::string node_id, const std::array<std::uint8_t, kSeedBytes>& seed);
  // 64 hex characters.
  static NodeIdentity from_seed_hex(std::string node_id, std::string_view seed_hex);
  static NodeIdentity generate(std::string node_id);

  const std::string& node_id() const { return node_id_; }
  const PublicKey& public_key() const { return public_key_; }
  std::string public_key_hex() const;
  std::string seed_hex() const;

  void trust(const std::string& peer, const PublicKey& key);
  void trust_hex(const std::string& peer, std::string_view key_hex);  // BadRequest on bad hex
  void distrust(const std::string& peer);
  std::optional<PublicKey> trusted_key(std::string_view peer) const;
  const std::map<std::string, PublicKey>& trust_list() const { return trust_; }

  std::array<std::uint8_t, kSignatureBytes> sign(std::string_view message) const;

 private:
  std::string node_id_;
  std::array<std::uint8_t, kSeedBytes> seed_{};
  PublicKey public_key_{};
  std::array<std::uint8_t, kSecretKeyBytes> secret_key_{};
  std::map<std::string, PublicKey> trust_;
};

struct Token {
  std::string issuer;
  std::string subject;
  std::int64_t issued_at = 0;   // ms since epoch
  std::int64_t expires_at = 0;  // ms since epoch
  std::array<std::uint8_t, kSignatureBytes> signature{};

  // The signed bytes: a format tag followed by issuer, subject, issued_at
  // and expires_at, each as a 4-byte big-endian length and the field
  // bytes. Timestamps are 8-byte big-endian.
  std::string signed_bytes() const;
  // signed_bytes() followed by the length-prefixed signature.
  std::string serialize() const;
  // Base64url (no padding) of serialize(); the bearer-token form.
  std::string encode() const;

  // Structural parse only. nullopt on any framing error.
  static std::optional<Token> parse(std::string_view bytes);
  static std::optional<Token> decode(std::string_view text);
};

struct Principal {
  std::string user_id;
  std::string home_node;
};

// Signs a token for `user` valid for ttl_seconds from now_ms.
Token issue_token(const NodeIdentity& node, std::string_view user, std::int64_t ttl_seconds, std::int64_t now_ms);

// Accepts a token iff its issuer is trusted, the signature verifies under
// the issuer's key, and it has not expired. Checks run in that order:
// framing errors are BadSignature, then UntrustedIssuer, BadSignature,
// Expired.
Principal verify_token(std::string_view encoded, const NodeIdentity& node, std::int64_t now_ms);
Principal verify_token(const Token& token, const NodeIdentity& node, std::int64_t now_ms);

std::string base64url_encode(std::string_view bytes);
std::optional<std::string> base64url_decode(std::string_view text);

}  // namespace casq::federation
