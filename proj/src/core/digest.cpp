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

#include "casq/core/digest.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace casq {

namespace {

void put_len(std::string& out, std::size_t n) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((n >> shift) & 0xff));
  }
}

void put_field(std::string& out, char tag, std::string_view bytes) {
  out.push_back(tag);
  put_len(out, bytes.size());
  out.append(bytes);
}

}  // namespace

void init_crypto() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  });
}

std::string sha256_hex(std::string_view bytes) {
  init_crypto();
  std::uint8_t hash[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(hash, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return to_hex(hash);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out(hex.size() / 2);
  std::size_t len = 0;
  const char* end = nullptr;
  if (hex.size() % 2 != 0 ||
      sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, &end) != 0 ||
      len != out.size()) {
    return {};
  }
  return out;
}

std::string encode_row(const Row& row) {
  std::string out;
  for (const Value& v : row) {
    switch (v.index()) {
      case 0: put_field(out, 'N', {}); break;
      case 1: put_field(out, 'I', std::to_string(std::get<std::int64_t>(v))); break;
      case 2: put_field(out, 'F', format_value(v)); break;
      case 3: put_field(out, 'S', std::get<std::string>(v)); break;
      case 4: put_field(out, 'D', std::get<Date>(v).to_iso()); break;
    }
  }
  return out;
}

std::string content_hash(const Schema& schema, const std::vector<Row>& rows) {
  std::vector<std::string> encoded;
  encoded.reserve(rows.size());
  for (const Row& r : rows) encoded.push_back(encode_row(r));
  std::sort(encoded.begin(), encoded.end());

  init_crypto();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  std::string header;
  for (const Column& c : schema) {
    put_field(header, 'C', c.name);
    put_field(header, 'T', column_type_name(c.type));
  }
  crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(header.data()),
                            header.size());
  for (const std::string& e : encoded) {
    std::string framed;
    put_len(framed, e.size());
    framed += e;
    crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(framed.data()),
                              framed.size());
  }
  std::uint8_t hash[crypto_hash_sha256_BYTES];
  crypto_hash_sha256_final(&st, hash);
  return to_hex(hash);
}

}  // namespace casq
