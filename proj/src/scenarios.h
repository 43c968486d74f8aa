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

#ifndef MECDT_SCENARIOS_H_
#define MECDT_SCENARIOS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "env.h"

namespace mecdt {

struct EnvSplit {
  std::vector<EnvSpec> train;
  std::vector<EnvSpec> heldout;
};

// For each user count K, the 3^K level tuples are shuffled with 'seed'; the
// first train_per_count become training environments and the next
// heldout_per_count are held out (both capped by what remains).
EnvSplit MakeEnvSplit(std::span<const int> user_counts, int train_per_count,
                      int heldout_per_count, uint64_t seed);

// Round-robin assignment of specs to servers: spec i goes to server i % E.
std::vector<std::vector<EnvSpec>> AssignToServers(std::span<const EnvSpec> specs,
                                                  int servers);

}  // namespace mecdt

#endif  // MECDT_SCENARIOS_H_
