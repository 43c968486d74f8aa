// Copyright 2026 The mecdt Authors.
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

#include "scenarios.h"

#include <set>
#include <string>
#include <vector>

#include "doctest.h"

namespace mecdt {
namespace {

TEST_CASE("split is disjoint, capped and seeded") {
  const std::vector<int> counts = {2, 3};
  const EnvSplit s = MakeEnvSplit(counts, 10, 10, 1);
  // K=2 has 9 tuples: all train, none held out.
  int k2_train = 0;
  int k2_held = 0;
  for (const auto& e : s.train) k2_train += e.users() == 2;
  for (const auto& e : s.heldout) k2_held += e.users() == 2;
  CHECK(k2_train == 9);
  CHECK(k2_held == 0);
  CHECK(s.train.size() == 19);
  CHECK(s.heldout.size() == 10);

  std::set<std::string> train_ids;
  for (const auto& e : s.train) train_ids.insert(e.LevelId());
  CHECK(train_ids.size() == s.train.size());
  for (const auto& e : s.heldout) CHECK(train_ids.count(e.LevelId()) == 0);

  const EnvSplit again = MakeEnvSplit(counts, 10, 10, 1);
  REQUIRE(again.heldout.size() == s.heldout.size());
  for (size_t i = 0; i < s.heldout.size(); ++i) {
    CHECK(again.heldout[i].levels == s.heldout[i].levels);
    CHECK(again.heldout[i].seed == s.heldout[i].seed);
  }
  const EnvSplit other = MakeEnvSplit(counts, 10, 10, 2);
  bool differs = false;
  for (size_t i = 0; i < s.heldout.size(); ++i) {
    differs |= other.heldout[i].levels != s.heldout[i].levels;
  }
  CHECK(differs);
}

TEST_CASE("round-robin server assignment") {
  const std::vector<int> counts = {3};
  const EnvSplit s = MakeEnvSplit(counts, 7, 0, 3);
  const auto per = AssignToServers(s.train, 3);
  REQUIRE(per.size() == 3);
  CHECK(per[0].size() == 3);
  CHECK(per[1].size() == 2);
  CHECK(per[2].size() == 2);
  CHECK(per[1][1].levels == s.train[4].levels);
}

}  // namespace
}  // namespace mecdt
