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

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::sqlrewrite::detail {

enum class ChainKind { Plain, MyDb, Group, Physical };
enum class ChainRole { Other, Table, Into };

// A dotted name: Word (Dot Word)*.
struct Chain {
  std::vector<std::size_t> words;  // token indices of the parts
  std::size_t first_token = 0;     // token index range [first_token, last_token]
  std::size_t last_token = 0;
  ChainKind kind = ChainKind::Plain;
  ChainRole role = ChainRole::Other;
  int depth = 0;
  bool has_alias = false;  // FROM item followed by an alias
};

struct TopClause {
  std::size_t first_token;  // "top"
  std::size_t last_token;   // the count (or closing paren)
  std::string count;
  std::size_t insert_before;  // token index where " LIMIT n" goes; tokens.size() = end
};

struct Analysis {
  std::shared_ptr<const std::string> source;  // owns the text the token views point into
  std::vector<Token> tokens;
  std::vector<Chain> chains;
  std::optional<std::size_t> into_chain;  // index into chains
  std::size_t into_keyword = 0;           // token index of INTO
  bool has_where = false;
  std::set<std::string> where_columns;
  std::vector<TopClause> tops;

  std::string part(const Chain& c, std::size_t i) const {
    return to_lower(tokens[c.words[i]].text);
  }
};

Analysis analyze(std::string_view query);

}  // namespace casq::sqlrewrite::detail
