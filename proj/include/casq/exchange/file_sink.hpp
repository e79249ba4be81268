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

#include <memory>
#include <optional>
#include <string>

#include "casq/core/value.hpp"
#include "casq/exchange/file_store.hpp"
#include "casq/scheduler/scheduler.hpp"

namespace casq::exchange {

enum class ExportFormat { Csv, Votable };

// "csv" or "votable" (case-insensitive; "xml" is accepted for VOTable).
// UnsupportedFormat otherwise.
ExportFormat parse_export_format(std::string_view name);
std::string_view format_name(ExportFormat f);

// Writes a job's rows into a download artifact. finish() returns the
// artifact URL. An empty result still produces a header (CSV) or an
// empty TABLEDATA (VOTable).
class FileSink : public scheduler::ResultSink {
 public:
  FileSink(FileStore& files, ExportFormat format, std::string table_name);
  ~FileSink() override;

  void on_schema(const Schema& schema) override;
  void on_batch(const std::vector<Row>& rows) override;
  std::optional<std::string> finish() override;
  void abort() override;

  const std::optional<FileArtifact>& artifact() const { return artifact_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::optional<FileArtifact> artifact_;
};

}  // namespace casq::exchange
