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

#include "casq/exchange/votable.hpp"

#include <sstream>

namespace casq::exchange {

std::string_view votable_datatype(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "int";
    case ColumnType::Float: return "double";
    case ColumnType::String:
    case ColumnType::Date: return "char";
  }
  return "char";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters other than tab/CR/LF are not allowed in XML 1.0.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
          out += "&#xFFFD;";
        } else {
          out += c;
        }
    }
  }
  return out;
}

void VotableWriter::header(const Schema& schema) {
  out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<VOTABLE version=\"1.3\" xmlns=\"http://www.ivoa.net/xml/VOTable/v1.3\">\n"
       << "  <RESOURCE>\n"
       << "    <TABLE name=\"" << xml_escape(name_) << "\">\n";
  for (const auto& c : schema) {
    out_ << "      <FIELD name=\"" << xml_escape(c.name) << "\" datatype=\"" << votable_datatype(c.type) << '"';
    if (c.type == ColumnType::String || c.type == ColumnType::Date) out_ << " arraysize=\"*\"";
    if (c.type == ColumnType::Date) out_ << " xtype=\"timestamp\"";
    out_ << "/>\n";
  }
  out_ << "      <DATA>\n        <TABLEDATA>\n";
}

void VotableWriter::row(const Row& row) {
  out_ << "          <TR>";
  for (const auto& v : row) {
    if (is_null(v)) {
      out_ << "<TD/>";
    } else {
      out_ << "<TD>" << xml_escape(format_value(v)) << "</TD>";
    }
  }
  out_ << "</TR>\n";
}

void VotableWriter::footer() {
  out_ << "        </TABLEDATA>\n      </DATA>\n    </TABLE>\n  </RESOURCE>\n</VOTABLE>\n";
}

std::string to_votable(const std::string& table_name, const Schema& schema, const std::vector<Row>& rows) {
  std::ostringstream os;
  VotableWriter w(os, table_name);
  w.header(schema);
  for (const auto& r : rows) w.row(r);
  w.footer();
  return os.str();
}

}  // namespace casq::exchange
