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

#include "casq/exchange/file_sink.hpp"

#include "casq/core/error.hpp"
#include "casq/exchange/csv.hpp"
#include "casq/exchange/votable.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::exchange {

ExportFormat parse_export_format(std::string_view name) {
  const std::string n = sqlrewrite::to_lower(name);
  if (n == "csv") return ExportFormat::Csv;
  if (n == "votable" || n == "xml") return ExportFormat::Votable;
  fail(ErrorCode::UnsupportedFormat, "unsupported export format '" + std::string(name) + "' (use csv or votable)");
}

std::string_view format_name(ExportFormat f) { return f == ExportFormat::Csv ? "csv" : "votable"; }

struct FileSink::Impl {
  FileStore::Writer writer;
  ExportFormat format;
  std::string table;
  std::optional<CsvWriter> csv;
  std::optional<VotableWriter> vot;
  bool have_schema = false;
};

FileSink::FileSink(FileStore& files, ExportFormat format, std::string table_name)
    : impl_(new Impl{files.begin(format == ExportFormat::Csv ? "csv" : "xml"), format, std::move(table_name), {},
                     {}, false}) {}

FileSink::~FileSink() = default;

void FileSink::on_schema(const Schema& schema) {
  if (schema.empty()) fail(ErrorCode::StorageFailure, "cannot export a result with no columns");
  auto& out = impl_->writer.out();
  if (impl_->format == ExportFormat::Csv) {
    impl_->csv.emplace(out);
    impl_->csv->header(schema);
  } else {
    impl_->vot.emplace(out, impl_->table);
    impl_->vot->header(schema);
  }
  impl_->have_schema = true;
}

void FileSink::on_batch(const std::vector<Row>& rows) {
  for (const auto& r : rows) {
    if (impl_->csv) impl_->csv->row(r);
    else impl_->vot->row(r);
  }
  if (!impl_->writer.out()) fail(ErrorCode::StorageFailure, "write to export file failed");
}

std::optional<std::string> FileSink::finish() {
  if (!impl_->have_schema) fail(ErrorCode::StorageFailure, "result had no schema");
  if (impl_->vot) impl_->vot->footer();
  artifact_ = impl_->writer.commit();
  return artifact_->url;
}

void FileSink::abort() { impl_.reset(); }

}  // namespace casq::exchange
