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

#include "casq/sqlrewrite/classify.hpp"

#include <cstdint>
#include <cstdio>

#include "analysis.hpp"
#include "casq/core/error.hpp"

namespace casq::sqlrewrite {

namespace detail {

namespace {

enum class FromState { None, ExpectTable, AfterTable };

// Words that end a FROM list or cannot be an alias.
const std::set<std::string, std::less<>> kClauseWords = {
    "where", "on",     "using",  "group",   "order", "having", "limit",  "union",
    "except", "intersect", "window", "offset", "select", "values", "natural", "left",
    "right", "inner",  "outer",  "full",    "cross", "join",   "from",   "into",
    "by",    "set",    "returning"};

// Words never treated as column references inside WHERE.
const std::set<std::string, std::less<>> kPredicateWords = {
    "and",  "or",   "not",    "in",    "is",    "null",  "like",    "between", "case",
    "when", "then", "else",   "end",   "exists", "escape", "glob",  "regexp",  "match",
    "collate", "true", "false", "cast", "as",   "select", "from",  "distinct", "all",
    "any",  "some", "integer", "real", "text"};

ChainKind kind_of(const std::string& head, std::size_t parts) {
  if (parts < 2) return ChainKind::Plain;
  if (head == "mydb") return ChainKind::MyDb;
  if (head == "group") return ChainKind::Group;
  if (head.rfind("mydb_", 0) == 0 && head.size() > 5) return ChainKind::Physical;
  return ChainKind::Plain;
}

}  // namespace

Analysis analyze(std::string_view query) {
  Analysis a;
  a.source = std::make_shared<const std::string>(query);
  a.tokens = tokenize(*a.source);
  const auto& toks = a.tokens;

  std::vector<std::size_t> sig;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].significant()) sig.push_back(i);
    if (toks[i].kind == TokenKind::QuotedIdent) {
      fail(ErrorCode::QueryRejected,
           "quoted or bracketed identifiers are not supported: " + std::string(toks[i].text));
    }
  }
  if (sig.empty()) fail(ErrorCode::EmptyQuery, "query is empty");
  if (!toks[sig[0]].is_word("select") && !toks[sig[0]].is_word("with")) {
    fail(ErrorCode::QueryRejected, "only SELECT queries are accepted");
  }
  for (std::size_t k = 0; k + 1 < sig.size(); ++k) {
    if (toks[sig[k]].is_punct(';')) {
      fail(ErrorCode::QueryRejected, "multi-statement batches are not accepted");
    }
  }

  std::vector<FromState> from(1, FromState::None);
  std::vector<bool> in_where(1, false);
  std::vector<std::vector<std::size_t>> open_tops(1);
  bool pending_into = false;
  int depth = 0;

  auto sig_at = [&](std::size_t k) -> const Token* { return k < sig.size() ? &toks[sig[k]] : nullptr; };

  for (std::size_t k = 0; k < sig.size(); ++k) {
    const Token& t = toks[sig[k]];

    if (t.is_punct('(')) {
      if (from.back() == FromState::ExpectTable) from.back() = FromState::AfterTable;
      ++depth;
      from.push_back(FromState::None);
      in_where.push_back(false);
      open_tops.emplace_back();
      continue;
    }
    if (t.is_punct(')')) {
      if (depth == 0) fail(ErrorCode::QueryRejected, "unbalanced parentheses");
      for (std::size_t ti : open_tops.back()) a.tops[ti].insert_before = sig[k];
      --depth;
      from.pop_back();
      in_where.pop_back();
      open_tops.pop_back();
      continue;
    }
    if (t.is_punct(',')) {
      if (from.back() == FromState::AfterTable) from.back() = FromState::ExpectTable;
      continue;
    }
    if (t.kind != TokenKind::Word) {
      if (from.back() == FromState::ExpectTable) from.back() = FromState::None;
      continue;
    }

    // Gather the dotted chain starting here.
    Chain c;
    c.depth = depth;
    c.first_token = sig[k];
    c.words.push_back(sig[k]);
    bool trailing_dot = false;
    while (k + 1 < sig.size() && toks[sig[k + 1]].kind == TokenKind::Dot) {
      const Token* after = sig_at(k + 2);
      if (after != nullptr && after->kind == TokenKind::Word) {
        c.words.push_back(sig[k + 2]);
        k += 2;
      } else {
        trailing_dot = true;
        k += 1;
        break;
      }
    }
    c.last_token = sig[k];
    const std::string head = to_lower(toks[c.words[0]].text);

    if ((head == "mydb" && trailing_dot) ||
        (head == "group" && (trailing_dot || c.words.size() == 2))) {
      const std::size_t begin = toks[c.first_token].offset;
      const std::size_t end = toks[c.last_token].offset + toks[c.last_token].text.size();
      fail(ErrorCode::MalformedPseudoName,
           std::string(head == "mydb" ? "expected MyDB.<table>" : "expected GROUP.<user>.<table>") +
               ", got '" + std::string(query.substr(begin, end - begin)) + "'");
    }
    c.kind = kind_of(head, c.words.size());

    const bool single = c.words.size() == 1 && !trailing_dot;
    if (single) {
      // Keywords drive the clause state.
      if (head == "from" || head == "join") {
        from.back() = FromState::ExpectTable;
        in_where.back() = false;
        continue;
      }
      if (head == "where") {
        from.back() = FromState::None;
        in_where.back() = true;
        a.has_where = true;
        continue;
      }
      if (head == "into") {
        pending_into = true;
        a.into_keyword = sig[k];
        continue;
      }
      if (head == "top") {
        const Token* prev = k > 0 ? sig_at(k - 1) : nullptr;
        if (prev != nullptr && (prev->is_word("select") || prev->is_word("distinct") ||
                                prev->is_word("all"))) {
          TopClause top;
          top.first_token = sig[k];
          const Token* n = sig_at(k + 1);
          if (n != nullptr && n->kind == TokenKind::Number) {
            top.count = std::string(n->text);
            top.last_token = sig[k + 1];
            k += 1;
          } else if (n != nullptr && n->is_punct('(') && sig_at(k + 2) != nullptr &&
                     sig_at(k + 2)->kind == TokenKind::Number && sig_at(k + 3) != nullptr &&
                     sig_at(k + 3)->is_punct(')')) {
            top.count = std::string(sig_at(k + 2)->text);
            top.last_token = sig[k + 3];
            k += 3;
          } else {
            fail(ErrorCode::QueryRejected, "TOP needs a numeric row count");
          }
          if (const Token* p = sig_at(k + 1); p != nullptr && p->is_word("percent")) {
            fail(ErrorCode::QueryRejected, "TOP ... PERCENT is not supported");
          }
          open_tops.back().push_back(a.tops.size());
          a.tops.push_back(top);
          continue;
        }
      }
      if (kClauseWords.count(head) != 0) {
        if (!open_tops.back().empty() &&
            (head == "limit" || head == "union" || head == "except" || head == "intersect")) {
          fail(ErrorCode::QueryRejected, "TOP cannot be combined with " + head);
        }
        from.back() = FromState::None;
        if (head != "by") in_where.back() = false;
        continue;
      }
      if (head == "as") continue;
    }

    if (pending_into) {
      pending_into = false;
      if (a.into_chain) fail(ErrorCode::QueryRejected, "only one INTO clause is allowed");
      if (c.kind != ChainKind::MyDb && c.kind != ChainKind::Physical) {
        fail(ErrorCode::QueryRejected, "select-into must target a MyDB table (INTO MyDB.<name>)");
      }
      c.role = ChainRole::Into;
      a.into_chain = a.chains.size();
      a.chains.push_back(c);
      continue;
    }

    if (from.back() == FromState::ExpectTable && !trailing_dot) {
      c.role = ChainRole::Table;
      from.back() = FromState::AfterTable;
    } else if (from.back() == FromState::AfterTable && single) {
      for (auto it = a.chains.rbegin(); it != a.chains.rend(); ++it) {
        if (it->depth == depth && it->role == ChainRole::Table) {
          it->has_alias = true;
          break;
        }
      }
    } else if (in_where.back() && !trailing_dot) {
      const Token* next = sig_at(k + 1);
      const bool is_call = next != nullptr && next->is_punct('(');
      const std::string col = to_lower(toks[c.words.back()].text);
      if (!is_call && kPredicateWords.count(col) == 0) a.where_columns.insert(col);
    }
    a.chains.push_back(c);
  }

  if (depth != 0) fail(ErrorCode::QueryRejected, "unbalanced parentheses");
  if (pending_into) fail(ErrorCode::QueryRejected, "INTO without a target");
  std::size_t end = sig.back() + 1;
  if (toks[sig.back()].is_punct(';')) end = sig.back();
  for (std::size_t ti : open_tops.back()) a.tops[ti].insert_before = end;
  return a;
}

}  // namespace detail

std::string TableRef::to_string() const {
  switch (scope) {
    case Scope::MyDb: return "MyDB." + table;
    case Scope::Group: return "GROUP." + owner + "." + table;
    case Scope::Public: return table;
  }
  return table;
}

TableRef TableRef::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = text.find('.', start);
    parts.emplace_back(text.substr(start, dot == std::string_view::npos ? text.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts) {
    if (p.empty()) fail(ErrorCode::MalformedPseudoName, "bad table name '" + std::string(text) + "'");
  }
  const std::string head = to_lower(parts[0]);
  if (head == "mydb") {
    if (parts.size() != 2) fail(ErrorCode::MalformedPseudoName, "expected MyDB.<table>");
    return {Scope::MyDb, {}, to_lower(parts[1])};
  }
  if (head == "group") {
    if (parts.size() != 3) fail(ErrorCode::MalformedPseudoName, "expected GROUP.<user>.<table>");
    return {Scope::Group, to_lower(parts[1]), to_lower(parts[2])};
  }
  return {Scope::Public, {}, to_lower(text)};
}

std::vector<std::string> QueryClass::public_tables() const {
  std::vector<std::string> out;
  for (const auto& r : refs) {
    if (r.scope == Scope::Public) out.push_back(r.table);
  }
  return out;
}

QueryClass classify(std::string_view query, const IndexCatalog& indexed) {
  using namespace detail;
  const Analysis a = analyze(query);
  QueryClass qc;
  for (std::size_t i = 0; i < a.chains.size(); ++i) {
    const Chain& c = a.chains[i];
    switch (c.kind) {
      case ChainKind::MyDb:
        qc.refs.insert({Scope::MyDb, {}, a.part(c, 1)});
        if (a.into_chain == i) qc.into_target = a.part(c, 1);
        break;
      case ChainKind::Group:
        qc.refs.insert({Scope::Group, a.part(c, 1), a.part(c, 2)});
        break;
      case ChainKind::Physical:
        break;
      case ChainKind::Plain:
        if (c.role == ChainRole::Table) {
          std::string name;
          for (std::size_t p = 0; p < c.words.size(); ++p) {
            if (p > 0) name += '.';
            name += a.part(c, p);
          }
          qc.refs.insert({Scope::Public, {}, name});
        }
        break;
    }
  }

  const auto publics = qc.public_tables();
  bool touches_index = false;
  for (const auto& t : publics) {
    auto it = indexed.find(t);
    if (it == indexed.end()) continue;
    for (const auto& col : a.where_columns) {
      if (it->second.count(col) != 0) touches_index = true;
    }
  }
  qc.full_scan_candidate = !publics.empty() && (!a.has_where || !touches_index);
  qc.fingerprint = fingerprint(query);
  return qc;
}

std::string fingerprint(std::string_view query) {
  static const std::set<std::string, std::less<>> kBeforeOperand = {
      "select", "where", "and", "or", "not", "when", "then", "else", "between", "in",
      "is", "like", "by", "on", "having", "case", "limit", "offset", "top", "return"};
  std::vector<Token> toks;
  for (const Token& t : tokenize(query)) {
    if (t.significant()) toks.push_back(t);
  }
  std::string normalized;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    // A sign in front of a number belongs to the literal.
    if ((t.is_punct('-') || t.is_punct('+')) && i + 1 < toks.size() &&
        toks[i + 1].kind == TokenKind::Number) {
      const Token* prev = i > 0 ? &toks[i - 1] : nullptr;
      const bool unary = prev == nullptr ||
                         (prev->kind == TokenKind::Punct && !prev->is_punct(')')) ||
                         prev->kind == TokenKind::Dot ||
                         (prev->kind == TokenKind::Word && kBeforeOperand.count(to_lower(prev->text)) != 0);
      if (unary) continue;
    }
    if (!normalized.empty()) normalized += ' ';
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String: normalized += '?'; break;
      case TokenKind::Word:
      case TokenKind::QuotedIdent: normalized += to_lower(t.text); break;
      default: normalized += t.text; break;
    }
  }
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : normalized) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace casq::sqlrewrite
