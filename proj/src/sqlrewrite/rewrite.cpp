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

#include "casq/sqlrewrite/rewrite.hpp"

#include <map>

#include "analysis.hpp"
#include "casq/core/error.hpp"

namespace casq::sqlrewrite {

namespace {

using detail::Analysis;
using detail::Chain;
using detail::ChainKind;
using detail::ChainRole;

// Token-level edit list applied in one pass.
struct Edits {
  std::map<std::size_t, std::string> replace;  // token index -> new text ("" deletes)
  std::map<std::size_t, std::string> before;   // text inserted before token index

  std::string apply(const Analysis& a) const {
    std::string out;
    for (std::size_t i = 0; i <= a.tokens.size(); ++i) {
      if (auto b = before.find(i); b != before.end()) out += b->second;
      if (i == a.tokens.size()) break;
      if (auto r = replace.find(i); r != replace.end()) {
        out += r->second;
      } else {
        out += a.tokens[i].text;
      }
    }
    return out;
  }

  void drop_range(std::size_t first, std::size_t last) {
    for (std::size_t i = first; i <= last; ++i) replace[i] = "";
  }
};

std::string physical_owner(const Analysis& a, const Chain& c) {
  return a.part(c, 0).substr(5);
}

}  // namespace

std::string physical_database(std::string_view user) { return "mydb_" + to_lower(user); }

static Analysis analyze_for_rewrite(std::string_view query) {
  try {
    return detail::analyze(query);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedPseudoName) fail(ErrorCode::QueryRejected, e.what());
    throw;
  }
}

std::string rewrite(std::string_view query, const std::string& requester, const NameCatalog& catalog) {
  const Analysis a = analyze_for_rewrite(query);
  const std::string me = to_lower(requester);
  Edits edits;

  auto check_read = [&](const std::string& owner, const std::string& table, const std::string& shown) {
    if (owner == me) {
      if (!catalog.mydb_table_exists(me, table)) {
        fail(ErrorCode::NoSuchTable, "no table " + shown + " in your MyDB");
      }
    } else if (!catalog.can_read(me, owner, table)) {
      fail(ErrorCode::AccessDenied, "table " + shown + " is not shared with " + me);
    }
  };

  for (const Chain& c : a.chains) {
    const bool into = c.role == ChainRole::Into;
    switch (c.kind) {
      case ChainKind::Plain: break;
      case ChainKind::MyDb: {
        const std::string table = a.part(c, 1);
        if (!into) check_read(me, table, "MyDB." + table);
        edits.replace[c.words[0]] = physical_database(me);
        break;
      }
      case ChainKind::Group: {
        const std::string owner = a.part(c, 1);
        const std::string table = a.part(c, 2);
        check_read(owner, table, "GROUP." + owner + "." + table);
        edits.replace[c.words[0]] = physical_database(owner);
        // Drop ".owner"; the dot before the table stays.
        for (std::size_t i = c.words[0] + 1; i <= c.words[1]; ++i) edits.replace[i] = "";
        break;
      }
      case ChainKind::Physical: {
        const std::string owner = physical_owner(a, c);
        const std::string table = a.part(c, 1);
        if (into) {
          if (owner != me) fail(ErrorCode::AccessDenied, "cannot write into " + a.part(c, 0));
        } else {
          check_read(owner, table, a.part(c, 0) + "." + table);
        }
        break;
      }
    }
  }
  return edits.apply(a);
}

std::string prepare_for_backend(std::string_view query) {
  const Analysis a = detail::analyze(query);
  Edits edits;
  if (a.into_chain) edits.drop_range(a.into_keyword, a.chains[*a.into_chain].last_token);
  for (const auto& top : a.tops) {
    edits.drop_range(top.first_token, top.last_token);
    edits.before[top.insert_before] += " LIMIT " + top.count;
  }
  return edits.apply(a);
}

std::set<std::string> physical_databases(std::string_view query) {
  const Analysis a = detail::analyze(query);
  std::set<std::string> out;
  for (const Chain& c : a.chains) {
    if (c.kind == ChainKind::Physical) out.insert(physical_owner(a, c));
  }
  return out;
}

std::string retarget_table(std::string_view query, std::string_view table, std::string_view replacement) {
  const Analysis a = detail::analyze(query);
  const std::string want = to_lower(table);
  Edits edits;
  for (const Chain& c : a.chains) {
    if (c.kind != ChainKind::Plain || c.role != ChainRole::Table) continue;
    std::string name;
    for (std::size_t p = 0; p < c.words.size(); ++p) {
      if (p > 0) name += '.';
      name += a.part(c, p);
    }
    if (name != want) continue;
    edits.drop_range(c.first_token, c.last_token);
    edits.replace[c.first_token] =
        std::string(replacement) + (c.has_alias ? "" : " AS " + a.part(c, c.words.size() - 1));
  }
  return edits.apply(a);
}

}  // namespace casq::sqlrewrite
