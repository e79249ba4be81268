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
#include <string>
#include <string_view>
#include <vector>

namespace casq::sqlrewrite {

enum class TokenKind {
  Word,         // identifier or keyword
  Number,
  String,       // single-quoted literal, quotes included
  QuotedIdent,  // "x", [x] or `x`
  Dot,
  Punct,        // operators, commas, parentheses, ...
  Space,
  Comment,
};

struct Token {
  TokenKind kind;
  std::string_view text;  // view into the tokenized query
  std::size_t offset;

  bool significant() const { return kind != TokenKind::Space && kind != TokenKind::Comment; }
  bool is_word(std::string_view lower_word) const;
  bool is_punct(char c) const { return kind == TokenKind::Punct && text.size() == 1 && text[0] == c; }
};

// Splits a query into tokens that concatenate back to the input exactly.
// Unterminated literals or comments throw QueryRejected.
std::vector<Token> tokenize(std::string_view query);

std::string to_lower(std::string_view s);

}  // namespace casq::sqlrewrite
