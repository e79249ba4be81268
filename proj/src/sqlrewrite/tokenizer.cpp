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

#include "casq/sqlrewrite/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "casq/core/error.hpp"

namespace casq::sqlrewrite {

namespace {

bool word_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::size_t scan_number(std::string_view q, std::size_t i) {
  while (i < q.size() && digit(q[i])) ++i;
  if (i < q.size() && q[i] == '.') {
    ++i;
    while (i < q.size() && digit(q[i])) ++i;
  }
  if (i < q.size() && (q[i] == 'e' || q[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < q.size() && (q[j] == '+' || q[j] == '-')) ++j;
    if (j < q.size() && digit(q[j])) {
      i = j;
      while (i < q.size() && digit(q[i])) ++i;
    }
  }
  return i;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool Token::is_word(std::string_view lower_word) const {
  if (kind != TokenKind::Word || text.size() != lower_word.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != lower_word[i]) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view q) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto emit = [&](TokenKind k, std::size_t end) {
    out.push_back(Token{k, q.substr(i, end - i), i});
    i = end;
  };
  auto last_significant = [&]() -> const Token* {
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      if (it->significant()) return &*it;
    }
    return nullptr;
  };

  while (i < q.size()) {
    const char c = q[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < q.size() && std::isspace(static_cast<unsigned char>(q[j]))) ++j;
      emit(TokenKind::Space, j);
    } else if (c == '-' && i + 1 < q.size() && q[i + 1] == '-') {
      std::size_t j = q.find('\n', i);
      emit(TokenKind::Comment, j == std::string_view::npos ? q.size() : j);
    } else if (c == '/' && i + 1 < q.size() && q[i + 1] == '*') {
      std::size_t j = q.find("*/", i + 2);
      if (j == std::string_view::npos) fail(ErrorCode::QueryRejected, "unterminated comment");
      emit(TokenKind::Comment, j + 2);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      while (true) {
        if (j >= q.size()) fail(ErrorCode::QueryRejected, "unterminated string literal");
        if (q[j] == '\'') {
          if (j + 1 < q.size() && q[j + 1] == '\'') {
            j += 2;
            continue;
          }
          break;
        }
        ++j;
      }
      emit(TokenKind::String, j + 1);
    } else if (c == '"' || c == '[' || c == '`') {
      const char close = c == '[' ? ']' : c;
      std::size_t j = q.find(close, i + 1);
      if (j == std::string_view::npos) fail(ErrorCode::QueryRejected, "unterminated identifier");
      emit(TokenKind::QuotedIdent, j + 1);
    } else if (word_start(c)) {
      std::size_t j = i;
      while (j < q.size() && word_char(q[j])) ++j;
      emit(TokenKind::Word, j);
    } else if (digit(c)) {
      emit(TokenKind::Number, scan_number(q, i));
    } else if (c == '.') {
      const Token* prev = last_significant();
      const bool after_name = prev != nullptr && (prev->kind == TokenKind::Word ||
                                                  prev->kind == TokenKind::QuotedIdent ||
                                                  prev->is_punct(')'));
      if (!after_name && i + 1 < q.size() && digit(q[i + 1])) {
        emit(TokenKind::Number, scan_number(q, i));
      } else {
        emit(TokenKind::Dot, i + 1);
      }
    } else {
      // Two-character operators stay together so fingerprints are stable.
      static constexpr std::string_view kPairs[] = {"<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
      std::size_t len = 1;
      for (std::string_view p : kPairs) {
        if (q.substr(i, 2) == p) len = 2;
      }
      emit(TokenKind::Punct, i + len);
    }
  }
  return out;
}

}  // namespace casq::sqlrewrite
