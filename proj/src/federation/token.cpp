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

#include "casq/federation/token.hpp"

#include <sodium.h>

#include <cstring>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/core/value.hpp"

namespace casq::federation {

namespace {

constexpr std::string_view kTokenTag = "casq-token-1";

void put_u32(std::string& out, std::uint32_t n) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xff));
}

void put_field(std::string& out, std::string_view bytes) {
  put_u32(out, static_cast<std::uint32_t>(bytes.size()));
  out.append(bytes);
}

std::string be64(std::int64_t v) {
  std::string out;
  const auto u = static_cast<std::uint64_t>(v);
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((u >> shift) & 0xff));
  return out;
}

std::int64_t from_be64(std::string_view b) {
  std::uint64_t u = 0;
  for (char c : b) u = (u << 8) | static_cast<unsigned char>(c);
  return static_cast<std::int64_t>(u);
}

struct Reader {
  std::string_view in;
  std::size_t pos = 0;

  std::optional<std::string_view> field() {
    if (in.size() - pos < 4) return std::nullopt;
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(in[pos + i]);
    pos += 4;
    if (in.size() - pos < n) return std::nullopt;
    auto out = in.substr(pos, n);
    pos += n;
    return out;
  }
};

PublicKey parse_key_hex(std::string_view hex) {
  const auto bytes = from_hex(hex);
  if (bytes.size() != kPublicKeyBytes) fail(ErrorCode::BadRequest, "verification keys are 64 hex characters");
  PublicKey k{};
  std::copy(bytes.begin(), bytes.end(), k.begin());
  return k;
}

}  // namespace

NodeIdentity NodeIdentity::from_seed(std::string node_id, const std::array<std::uint8_t, kSeedBytes>& seed) {
  init_crypto();
  if (node_id.empty()) fail(ErrorCode::BadRequest, "node id required");
  NodeIdentity n;
  n.node_id_ = std::move(node_id);
  n.seed_ = seed;
  crypto_sign_seed_keypair(n.public_key_.data(), n.secret_key_.data(), seed.data());
  n.trust_[n.node_id_] = n.public_key_;
  return n;
}

NodeIdentity NodeIdentity::from_seed_hex(std::string node_id, std::string_view seed_hex) {
  const auto bytes = from_hex(seed_hex);
  if (bytes.size() != kSeedBytes) fail(ErrorCode::BadRequest, "node key seeds are 64 hex characters");
  std::array<std::uint8_t, kSeedBytes> seed{};
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return from_seed(std::move(node_id), seed);
}

NodeIdentity NodeIdentity::generate(std::string node_id) {
  init_crypto();
  std::array<std::uint8_t, kSeedBytes> seed{};
  randombytes_buf(seed.data(), seed.size());
  return from_seed(std::move(node_id), seed);
}

std::string NodeIdentity::public_key_hex() const { return to_hex(public_key_); }
std::string NodeIdentity::seed_hex() const { return to_hex(seed_); }

void NodeIdentity::trust(const std::string& peer, const PublicKey& key) {
  if (peer == node_id_) return;
  trust_[peer] = key;
}

void NodeIdentity::trust_hex(const std::string& peer, std::string_view key_hex) { trust(peer, parse_key_hex(key_hex)); }

void NodeIdentity::distrust(const std::string& peer) {
  if (peer != node_id_) trust_.erase(peer);
}

std::optional<PublicKey> NodeIdentity::trusted_key(std::string_view peer) const {
  auto it = trust_.find(std::string(peer));
  if (it == trust_.end()) return std::nullopt;
  return it->second;
}

std::array<std::uint8_t, kSignatureBytes> NodeIdentity::sign(std::string_view message) const {
  std::array<std::uint8_t, kSignatureBytes> sig{};
  crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const unsigned char*>(message.data()), message.size(),
                       secret_key_.data());
  return sig;
}

std::string Token::signed_bytes() const {
  std::string out;
  put_field(out, kTokenTag);
  put_field(out, issuer);
  put_field(out, subject);
  put_field(out, be64(issued_at));
  put_field(out, be64(expires_at));
  return out;
}

std::string Token::serialize() const {
  std::string out = signed_bytes();
  put_field(out, std::string_view(reinterpret_cast<const char*>(signature.data()), signature.size()));
  return out;
}

std::string Token::encode() const { return base64url_encode(serialize()); }

std::optional<Token> Token::parse(std::string_view bytes) {
  Reader r{bytes};
  auto tag = r.field();
  auto issuer = r.field();
  auto subject = r.field();
  auto issued = r.field();
  auto expires = r.field();
  auto sig = r.field();
  if (!tag || !issuer || !subject || !issued || !expires || !sig) return std::nullopt;
  if (*tag != kTokenTag || issued->size() != 8 || expires->size() != 8 || sig->size() != kSignatureBytes ||
      r.pos != bytes.size()) {
    return std::nullopt;
  }
  Token t;
  t.issuer = std::string(*issuer);
  t.subject = std::string(*subject);
  t.issued_at = from_be64(*issued);
  t.expires_at = from_be64(*expires);
  std::memcpy(t.signature.data(), sig->data(), kSignatureBytes);
  return t;
}

std::optional<Token> Token::decode(std::string_view text) {
  auto bytes = base64url_decode(text);
  if (!bytes) return std::nullopt;
  return parse(*bytes);
}

Token issue_token(const NodeIdentity& node, std::string_view user, std::int64_t ttl_seconds, std::int64_t now) {
  if (ttl_seconds <= 0) fail(ErrorCode::BadRequest, "token lifetime must be positive");
  if (user.empty()) fail(ErrorCode::AuthFailed, "user required");
  Token t;
  t.issuer = node.node_id();
  t.subject = std::string(user);
  t.issued_at = now;
  t.expires_at = now + ttl_seconds * 1000;
  t.signature = node.sign(t.signed_bytes());
  return t;
}

Principal verify_token(const Token& t, const NodeIdentity& node, std::int64_t now) {
  const auto key = node.trusted_key(t.issuer);
  if (!key) fail(ErrorCode::UntrustedIssuer, "node " + node.node_id() + " does not trust issuer '" + t.issuer + "'");
  const std::string msg = t.signed_bytes();
  if (crypto_sign_verify_detached(t.signature.data(), reinterpret_cast<const unsigned char*>(msg.data()), msg.size(),
                                  key->data()) != 0) {
    fail(ErrorCode::BadSignature, "token signature does not verify");
  }
  if (t.expires_at <= t.issued_at) fail(ErrorCode::BadSignature, "token lifetime is empty");
  if (now >= t.expires_at) fail(ErrorCode::Expired, "token expired");
  return {t.subject, t.issuer};
}

Principal verify_token(std::string_view encoded, const NodeIdentity& node, std::int64_t now) {
  auto t = Token::decode(encoded);
  if (!t) fail(ErrorCode::BadSignature, "malformed token");
  return verify_token(*t, node, now);
}

std::string base64url_encode(std::string_view bytes) {
  init_crypto();
  const int variant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
  std::string out(sodium_base64_encoded_len(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
                    variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::optional<std::string> base64url_decode(std::string_view text) {
  init_crypto();
  std::string out(text.size(), '\0');
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()), out.size(), text.data(), text.size(), nullptr,
                        &len, &end, sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
      end != text.data() + text.size()) {
    return std::nullopt;
  }
  out.resize(len);
  return out;
}

}  // namespace casq::federation
