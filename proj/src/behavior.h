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

#ifndef MECDT_BEHAVIOR_H_
#define MECDT_BEHAVIOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "env.h"
#include "rng.h"
#include "trajectory.h"

namespace mecdt {

enum class BehaviorKind { kRandom, kProportional, kHillclimb };

// Share of episodes rolled out by each scripted policy.
struct PolicyMix {
  double random = 0.3;
  double proportional = 0.3;
  double hillclimb = 0.4;
  int hillclimb_iters = 128;

  // Deterministic assignment: episode i of n gets the policy whose
  // cumulative fraction covers (i + 0.5) / n.
  BehaviorKind ForEpisode(int episode, int episodes) const;
};

// Uniform [0, 1] entries for active users, zero padding.
Action RandomPolicy(int active_users, int max_users, Rng& rng);

// Full resolution; bandwidth and frequency shares proportional to each user's
// attention-weighted bit (and cycle) demand for the upcoming GoP.
Action DemandProportionalPolicy(const SystemConfig& cfg,
                                std::span<const double> raw_state,
                                std::span<const UserProfile> profiles);

// Coordinate pattern search on the one-step reward, starting from the
// proportional action. Each candidate evaluation consumes one iteration;
// the step size halves after a sweep without improvement.
Action HillclimbPolicy(const MecEnv& env, int iters, Rng& rng);

Action BehaviorAction(BehaviorKind kind, const MecEnv& env, int iters, Rng& rng);

struct Rollout {
  Trajectory trajectory;
  double min_qoe = 0.0;
};

// Plays one episode of 'spec' with a scripted policy.
Rollout RunBehaviorEpisode(const SystemConfig& cfg, const EnvSpec& spec,
                           BehaviorKind kind, int hillclimb_iters,
                           uint64_t policy_seed);

// Episode seed of episode i of an environment.
uint64_t EpisodeSeed(const EnvSpec& spec, int episode);

DatasetShard CollectDataset(const SystemConfig& cfg, int mec_id,
                            std::span<const EnvSpec> specs,
                            const PolicyMix& mix, int episodes_per_env,
                            uint64_t seed, int threads = 1);

}  // namespace mecdt

#endif  // MECDT_BEHAVIOR_H_
