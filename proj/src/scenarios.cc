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

#include <algorithm>

#include "rng.h"
#include "status.h"

namespace mecdt {
namespace {

constexpr uint64_t kTrainTag = 0x747261696e;
constexpr uint64_t kHeldoutTag = 0x686f6c64;

std::vector<UserLevel> TupleFromIndex(int index, int users) {
  std::vector<UserLevel> levels(users);
  for (int k = users - 1; k >= 0; --k) {
    levels[k] = static_cast<UserLevel>(index % kAttentionLevels);
    index /= kAttentionLevels;
  }
  return levels;
}

}  // namespace

EnvSplit MakeEnvSplit(std::span<const int> user_counts, int train_per_count,
                      int heldout_per_count, uint64_t seed) {
  Require(train_per_count >= 0 && heldout_per_count >= 0,
          "per-count env numbers must be >= 0");
  EnvSplit split;
  for (int k : user_counts) {
    Require(k >= 1 && k <= 12, "user count out of range");
    int tuples = 1;
    for (int i = 0; i < k; ++i) tuples *= kAttentionLevels;
    std::vector<int> order(tuples);
    for (int i = 0; i < tuples; ++i) order[i] = i;
    Rng rng(DeriveSeed(seed, {static_cast<uint64_t>(k)}));
    std::shuffle(order.begin(), order.end(), rng);
    const int n_train = std::min(train_per_count, tuples);
    const int n_held = std::min(heldout_per_count, tuples - n_train);
    for (int i = 0; i < n_train + n_held; ++i) {
      const bool train = i < n_train;
      EnvSpec spec;
      spec.levels = TupleFromIndex(order[i], k);
      spec.seed = DeriveSeed(seed, {train ? kTrainTag : kHeldoutTag,
                                    static_cast<uint64_t>(k),
                                    static_cast<uint64_t>(order[i])});
      (train ? split.train : split.heldout).push_back(std::move(spec));
    }
  }
  return split;
}

std::vector<std::vector<EnvSpec>> AssignToServers(std::span<const EnvSpec> specs,
                                                  int servers) {
  Require(servers >= 1, "need at least one server");
  std::vector<std::vector<EnvSpec>> out(servers);
  for (size_t i = 0; i < specs.size(); ++i) out[i % servers].push_back(specs[i]);
  return out;
}

}  // namespace mecdt
