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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "casq/mydb/mydb.hpp"
#include "casq/sqlrewrite/rewrite.hpp"

namespace casq::mydb {

enum class MemberStatus { Invited, Accepted };
std::string_view member_status_name(MemberStatus s);

struct Group {
  std::int64_t group_id = 0;
  std::string name;
  std::string owner;
  std::map<std::string, MemberStatus> members;
};

// Groups, invitations and table publications. State lives in the admin
// store, so every mutation is linearizable. Installs hooks on the MyDB
// manager: dropping a table revokes its publications, and table listings
// report their publications.
class Groups {
 public:
  Groups(Store& store, MyDbManager& mydb);

  Group create_group(std::string_view owner, std::string_view name);
  Group get(std::int64_t group_id);  // UnknownGroup
  std::optional<Group> find_by_name(std::string_view name);
  // Groups in which the user is invited or accepted.
  std::vector<Group> groups_of(std::string_view user);

  // Only the owner may invite.
  Group invite(std::int64_t group_id, std::string_view inviter, std::string_view invitee);
  Group accept(std::int64_t group_id, std::string_view user);
  TableInfo publish(std::string_view user, std::string_view table, std::int64_t group_id);

  // Owner reads own existing tables; others need an ACCEPTED membership in
  // a group the table is published to.
  bool check_access(std::string_view requester, std::string_view owner, std::string_view table);

  std::set<std::int64_t> publications(const std::string& owner, const std::string& table);

 private:
  void revoke(const std::string& owner, const std::string& table);

  Store& store_;
  MyDbManager& mydb_;
};

// Name resolution for the rewriter backed by live MyDB and group state.
class MyDbCatalog : public sqlrewrite::NameCatalog {
 public:
  MyDbCatalog(MyDbManager& mydb, Groups& groups) : mydb_(mydb), groups_(groups) {}
  bool mydb_table_exists(const std::string& user, const std::string& table) const override;
  bool can_read(const std::string& requester, const std::string& owner, const std::string& table) const override;

 private:
  MyDbManager& mydb_;
  Groups& groups_;
};

}  // namespace casq::mydb
