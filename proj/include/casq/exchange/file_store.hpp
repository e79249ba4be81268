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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

namespace casq::exchange {

inline constexpr int kDefaultTtlDays = 7;

struct FileArtifact {
  std::filesystem::path path;
  std::int64_t bytes = 0;
  std::string digest;  // SHA-256 hex of the content
  std::string url;     // /files/<digest>
  std::string content_type;
  std::int64_t created_at = 0;  // ms since epoch
  std::int64_t expires_at = 0;
};

// Download artifacts named by content digest. Files are written to a
// temporary name and renamed into place once complete.
class FileStore {
 public:
  explicit FileStore(std::filesystem::path dir, int ttl_days = kDefaultTtlDays);

  class Writer {
   public:
    Writer(Writer&&) noexcept;
    ~Writer();
    std::ostream& out() { return out_; }
    FileArtifact commit();

   private:
    friend class FileStore;
    Writer(FileStore& store, std::string extension);
    FileStore* store_;
    std::string extension_;
    std::filesystem::path temp_;
    std::ofstream out_;
    bool done_ = false;
  };

  // extension: "csv" or "xml".
  Writer begin(const std::string& extension);
  FileArtifact put(const std::string& extension, const std::string& content);

  // Artifact for a digest unless missing or expired.
  std::optional<FileArtifact> find(const std::string& digest) const;
  // Deletes expired artifacts; returns how many.
  std::size_t sweep();

  const std::filesystem::path& dir() const { return dir_; }
  std::int64_t ttl_ms() const { return ttl_ms_; }

 private:
  FileArtifact describe(const std::filesystem::path& p, const std::string& digest) const;

  std::filesystem::path dir_;
  std::int64_t ttl_ms_;
};

std::string content_type_for(const std::string& extension);
// SHA-256 of a file's bytes, hex.
std::string file_sha256(const std::filesystem::path& p);

}  // namespace casq::exchange
