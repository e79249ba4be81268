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

#include "casq/exchange/file_store.hpp"

#include <sodium.h>

#include <atomic>
#include <chrono>
#include <vector>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/core/value.hpp"

namespace casq::exchange {

namespace fs = std::filesystem;

namespace {

std::atomic<std::uint64_t> g_temp_counter{0};

bool is_hex_digest(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::int64_t mtime_ms(const fs::path& p) {
  const auto t = fs::last_write_time(p);
  const auto sys = fs::file_time_type::clock::to_sys(t);
  return std::chrono::duration_cast<std::chrono::milliseconds>(sys.time_since_epoch()).count();
}

}  // namespace

std::string content_type_for(const std::string& extension) {
  if (extension == "csv") return "text/csv; charset=utf-8";
  if (extension == "xml") return "application/x-votable+xml";
  return "application/octet-stream";
}

std::string file_sha256(const fs::path& p) {
  init_crypto();
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::StorageFailure, "cannot read " + p.string());
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) {
      crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(buf.data()),
                                static_cast<unsigned long long>(got));
    }
  }
  unsigned char out[crypto_hash_sha256_BYTES];
  crypto_hash_sha256_final(&st, out);
  return to_hex(std::span<const std::uint8_t>(out, sizeof out));
}

FileStore::FileStore(fs::path dir, int ttl_days)
    : dir_(std::move(dir)), ttl_ms_(static_cast<std::int64_t>(ttl_days) * 24 * 3600 * 1000) {
  fs::create_directories(dir_);
}

FileStore::Writer::Writer(FileStore& store, std::string extension)
    : store_(&store), extension_(std::move(extension)) {
  temp_ = store.dir_ / (".tmp-" + std::to_string(now_ms()) + "-" + std::to_string(g_temp_counter++));
  out_.open(temp_, std::ios::binary);
  if (!out_) fail(ErrorCode::StorageFailure, "cannot create " + temp_.string());
}

FileStore::Writer::Writer(Writer&& o) noexcept
    : store_(o.store_), extension_(std::move(o.extension_)), temp_(std::move(o.temp_)),
      out_(std::move(o.out_)), done_(o.done_) {
  o.done_ = true;
}

FileStore::Writer::~Writer() {
  if (!done_) {
    out_.close();
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

FileArtifact FileStore::Writer::commit() {
  out_.flush();
  if (!out_) fail(ErrorCode::StorageFailure, "write failed for " + temp_.string());
  out_.close();
  const std::string digest = file_sha256(temp_);
  const fs::path final_path = store_->dir_ / (digest + "." + extension_);
  std::error_code ec;
  fs::rename(temp_, final_path, ec);
  if (ec) fail(ErrorCode::StorageFailure, "cannot publish " + final_path.string() + ": " + ec.message());
  // Identical content seen again: refresh the expiry.
  fs::last_write_time(final_path, fs::file_time_type::clock::now(), ec);
  done_ = true;
  return store_->describe(final_path, digest);
}

FileStore::Writer FileStore::begin(const std::string& extension) { return Writer(*this, extension); }

FileArtifact FileStore::put(const std::string& extension, const std::string& content) {
  auto w = begin(extension);
  w.out().write(content.data(), static_cast<std::streamsize>(content.size()));
  return w.commit();
}

FileArtifact FileStore::describe(const fs::path& p, const std::string& digest) const {
  FileArtifact a;
  a.path = p;
  a.bytes = static_cast<std::int64_t>(fs::file_size(p));
  a.digest = digest;
  a.url = "/files/" + digest;
  const std::string ext = p.extension().string();
  a.content_type = content_type_for(ext.empty() ? "" : ext.substr(1));
  a.created_at = mtime_ms(p);
  a.expires_at = a.created_at + ttl_ms_;
  return a;
}

std::optional<FileArtifact> FileStore::find(const std::string& digest) const {
  if (!is_hex_digest(digest)) return std::nullopt;
  for (const char* ext : {"csv", "xml"}) {
    const fs::path p = dir_ / (digest + "." + ext);
    std::error_code ec;
    if (!fs::exists(p, ec)) continue;
    FileArtifact a = describe(p, digest);
    if (a.expires_at <= now_ms()) return std::nullopt;
    return a;
  }
  return std::nullopt;
}

std::size_t FileStore::sweep() {
  std::size_t removed = 0;
  const std::int64_t now = now_ms();
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const bool temp = name.rfind(".tmp-", 0) == 0;
    if (mtime_ms(entry.path()) + ttl_ms_ <= now || (temp && mtime_ms(entry.path()) + 24 * 3600 * 1000 <= now)) {
      std::error_code ec;
      if (fs::remove(entry.path(), ec)) ++removed;
    }
  }
  return removed;
}

}  // namespace casq::exchange
