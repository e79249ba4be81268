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

#include "casq/mydb/groups.hpp"

#include "casq/core/error.hpp"

namespace casq::mydb {

namespace {

std::optional<Group> load_group(sqlite::Database& db, std::int64_t id) {
  auto st = db.prepare("SELECT group_id, name, owner FROM groups WHERE group_id = ?1");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  Group g{st.column_int64(0), st.column_text(1), st.column_text(2), {}};
  auto m = db.prepare("SELECT user_id, status FROM group_members WHERE group_id = ?1");
  m.bind(1, id);
  while (m.step()) {
    g.members[m.column_text(0)] = m.column_text(1) == "ACCEPTED" ? MemberStatus::Accepted : MemberStatus::Invited;
  }
  return g;
}

Group require_group(sqlite::Database& db, std::int64_t id) {
  auto g = load_group(db, id);
  if (!g) fail(ErrorCode::UnknownGroup, "no group with id " + std::to_string(id));
  return *g;
}

}  // namespace

std::string_view member_status_name(MemberStatus s) {
  return s == MemberStatus::Accepted ? "ACCEPTED" : "INVITED";
}

Groups::Groups(Store& store, MyDbManager& mydb) : store_(store), mydb_(mydb) {
  mydb_.set_drop_hook([this](const std::string& owner, const std::string& table) { revoke(owner, table); });
  mydb_.set_publications_lookup(
      [this](const std::string& owner, const std::string& table) { return publications(owner, table); });
}

Group Groups::create_group(std::string_view owner_in, std::string_view name) {
  const std::string owner = store_.get_user(owner_in).user_id;
  if (name.empty()) fail(ErrorCode::BadRequest, "group name is empty");
  return store_.with_db([&](sqlite::Database& db) {
    sqlite::Transaction txn(db);
    auto exists = db.prepare("SELECT 1 FROM groups WHERE name = ?1");
    exists.bind(1, name);
    if (exists.step()) fail(ErrorCode::DuplicateGroup, "group '" + std::string(name) + "' already exists");
    db.prepare("INSERT INTO groups (name, owner) VALUES (?1, ?2)").bind(1, name).bind(2, owner).run();
    const std::int64_t id = db.last_insert_rowid();
    db.prepare("INSERT INTO group_members (group_id, user_id, status) VALUES (?1, ?2, 'ACCEPTED')")
        .bind(1, id)
        .bind(2, owner)
        .run();
    txn.commit();
    return require_group(db, id);
  });
}

Group Groups::get(std::int64_t id) {
  return store_.with_db([&](sqlite::Database& db) { return require_group(db, id); });
}

std::optional<Group> Groups::find_by_name(std::string_view name) {
  return store_.with_db([&](sqlite::Database& db) -> std::optional<Group> {
    auto st = db.prepare("SELECT group_id FROM groups WHERE name = ?1");
    st.bind(1, name);
    if (!st.step()) return std::nullopt;
    return load_group(db, st.column_int64(0));
  });
}

std::vector<Group> Groups::groups_of(std::string_view user_in) {
  const std::string user = normalize_user_id(user_in);
  return store_.with_db([&](sqlite::Database& db) {
    std::vector<std::int64_t> ids;
    auto st = db.prepare("SELECT group_id FROM group_members WHERE user_id = ?1 ORDER BY group_id");
    st.bind(1, user);
    while (st.step()) ids.push_back(st.column_int64(0));
    std::vector<Group> out;
    for (auto id : ids) out.push_back(require_group(db, id));
    return out;
  });
}

Group Groups::invite(std::int64_t id, std::string_view inviter_in, std::string_view invitee_in) {
  const std::string inviter = normalize_user_id(inviter_in);
  const std::string invitee = store_.get_user(invitee_in).user_id;
  return store_.with_db([&](sqlite::Database& db) {
    Group g = require_group(db, id);
    if (g.owner != inviter) fail(ErrorCode::NotOwner, "only the owner of " + g.name + " may invite");
    if (g.members.count(invitee) != 0) fail(ErrorCode::AlreadyMember, invitee + " is already in " + g.name);
    db.prepare("INSERT INTO group_members (group_id, user_id, status) VALUES (?1, ?2, 'INVITED')")
        .bind(1, id)
        .bind(2, invitee)
        .run();
    g.members[invitee] = MemberStatus::Invited;
    return g;
  });
}

Group Groups::accept(std::int64_t id, std::string_view user_in) {
  const std::string user = normalize_user_id(user_in);
  return store_.with_db([&](sqlite::Database& db) {
    Group g = require_group(db, id);
    auto it = g.members.find(user);
    if (it == g.members.end() || it->second != MemberStatus::Invited) {
      fail(ErrorCode::NotInvited, user + " has no pending invitation to " + g.name);
    }
    db.prepare("UPDATE group_members SET status = 'ACCEPTED' WHERE group_id = ?1 AND user_id = ?2")
        .bind(1, id)
        .bind(2, user)
        .run();
    it->second = MemberStatus::Accepted;
    return g;
  });
}

TableInfo Groups::publish(std::string_view user_in, std::string_view table_in, std::int64_t id) {
  const std::string user = normalize_user_id(user_in);
  const Group g = get(id);
  auto m = g.members.find(user);
  if (m == g.members.end() || m->second != MemberStatus::Accepted) {
    fail(ErrorCode::NotMember, user + " is not an accepted member of " + g.name);
  }
  const TableInfo info = mydb_.get_table(user, table_in);
  store_.with_db([&](sqlite::Database& db) {
    db.prepare("INSERT OR IGNORE INTO publications (owner, table_name, group_id) VALUES (?1, ?2, ?3)")
        .bind(1, user)
        .bind(2, info.name)
        .bind(3, id)
        .run();
  });
  return mydb_.get_table(user, info.name);
}

std::set<std::int64_t> Groups::publications(const std::string& owner, const std::string& table) {
  return store_.with_db([&](sqlite::Database& db) {
    std::set<std::int64_t> out;
    auto st = db.prepare("SELECT group_id FROM publications WHERE owner = ?1 AND table_name = ?2");
    st.bind(1, owner).bind(2, table);
    while (st.step()) out.insert(st.column_int64(0));
    return out;
  });
}

void Groups::revoke(const std::string& owner, const std::string& table) {
  store_.with_db([&](sqlite::Database& db) {
    db.prepare("DELETE FROM publications WHERE owner = ?1 AND table_name = ?2").bind(1, owner).bind(2, table).run();
  });
}

bool Groups::check_access(std::string_view requester_in, std::string_view owner_in, std::string_view table_in) {
  std::string requester, owner, table;
  try {
    requester = normalize_user_id(requester_in);
    owner = normalize_user_id(owner_in);
    table = normalize_table_name(table_in);
  } catch (const Error&) {
    return false;
  }
  if (!mydb_.table_exists(owner, table)) return false;
  if (requester == owner) return true;
  return store_.with_db([&](sqlite::Database& db) {
    auto st = db.prepare(R"sql(
      SELECT 1 FROM publications p
      JOIN group_members m ON m.group_id = p.group_id
      WHERE p.owner = ?1 AND p.table_name = ?2 AND m.user_id = ?3 AND m.status = 'ACCEPTED')sql");
    st.bind(1, owner).bind(2, table).bind(3, requester);
    return st.step();
  });
}

bool MyDbCatalog::mydb_table_exists(const std::string& user, const std::string& table) const {
  return mydb_.table_exists(user, table);
}

bool MyDbCatalog::can_read(const std::string& requester, const std::string& owner, const std::string& table) const {
  return groups_.check_access(requester, owner, table);
}

}  // namespace casq::mydb
