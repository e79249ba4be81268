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

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace casq::testing {

// Minimal XML well-formedness check: balanced, properly nested tags,
// quoted attributes without duplicates, known entities, one root.
// Returns an empty string when the document is well formed.
inline std::string xml_problem(const std::string& doc, std::map<std::string, int>* element_counts = nullptr) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  auto is_name_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.'; };
  auto check_text = [&](std::size_t from, std::size_t to) -> std::string {
    for (std::size_t k = from; k < to; ++k) {
      if (doc[k] == '<') return "stray <";
      if (doc[k] == '&') {
        const std::size_t semi = doc.find(';', k);
        if (semi == std::string::npos || semi > to) return "bad entity";
        const std::string ent = doc.substr(k + 1, semi - k - 1);
        if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos" && ent.rfind("#", 0) != 0) {
          return "unknown entity " + ent;
        }
      }
    }
    return {};
  };
  if (doc.rfind("<?xml", 0) == 0) {
    i = doc.find("?>");
    if (i == std::string::npos) return "unterminated declaration";
    i += 2;
  }
  while (i < doc.size()) {
    const std::size_t lt = doc.find('<', i);
    const std::size_t text_end = lt == std::string::npos ? doc.size() : lt;
    if (stack.empty()) {
      for (std::size_t k = i; k < text_end; ++k) {
        if (!std::isspace(static_cast<unsigned char>(doc[k]))) return "text outside root";
      }
    } else if (auto p = check_text(i, text_end); !p.empty()) {
      return p;
    }
    if (lt == std::string::npos) break;
    const std::size_t gt = doc.find('>', lt);
    if (gt == std::string::npos) return "unterminated tag";
    std::string tag = doc.substr(lt + 1, gt - lt - 1);
    i = gt + 1;
    if (tag.rfind("!--", 0) == 0) continue;
    if (!tag.empty() && tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return "mismatched </" + name + ">";
      stack.pop_back();
      continue;
    }
    bool self_close = !tag.empty() && tag.back() == '/';
    if (self_close) tag.pop_back();
    std::size_t k = 0;
    while (k < tag.size() && is_name_char(tag[k])) ++k;
    const std::string name = tag.substr(0, k);
    if (name.empty()) return "empty tag name";
    std::set<std::string> attrs;
    while (k < tag.size()) {
      while (k < tag.size() && std::isspace(static_cast<unsigned char>(tag[k]))) ++k;
      if (k >= tag.size()) break;
      const std::size_t a = k;
      while (k < tag.size() && is_name_char(tag[k])) ++k;
      const std::string attr = tag.substr(a, k - a);
      if (attr.empty() || k >= tag.size() || tag[k] != '=') return "bad attribute in <" + name + ">";
      if (!attrs.insert(attr).second) return "duplicate attribute " + attr;
      ++k;
      if (k >= tag.size() || (tag[k] != '"' && tag[k] != '\'')) return "unquoted attribute " + attr;
      const char q = tag[k];
      const std::size_t end = tag.find(q, k + 1);
      if (end == std::string::npos) return "unterminated attribute " + attr;
      if (tag.substr(k + 1, end - k - 1).find('<') != std::string::npos) return "< in attribute";
      k = end + 1;
    }
    if (element_counts) (*element_counts)[name]++;
    if (stack.empty()) ++roots;
    if (!self_close) stack.push_back(name);
  }
  if (!stack.empty()) return "unclosed <" + stack.back() + ">";
  if (roots != 1) return "expected one root element";
  return {};
}

}  // namespace casq::testing
