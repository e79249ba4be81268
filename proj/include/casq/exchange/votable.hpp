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

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "casq/core/value.hpp"

namespace casq::exchange {

// VOTable datatype for a column type: int, double, or char (with
// arraysize="*") for strings and ISO-8601 dates.
std::string_view votable_datatype(ColumnType type);

std::string xml_escape(std::string_view text);

// Streams a VOTABLE document with one RESOURCE holding one TABLE: a FIELD
// per column and the rows as TABLEDATA. NULL cells are empty TD elements.
class VotableWriter {
 public:
  VotableWriter(std::ostream& out, std::string table_name) : out_(out), name_(std::move(table_name)) {}
  void header(const Schema& schema);
  void row(const Row& row);
  void footer();

 private:
  std::ostream& out_;
  std::string name_;
};

std::string to_votable(const std::string& table_name, const Schema& schema, const std::vector<Row>& rows);

}  // namespace casq::exchange
