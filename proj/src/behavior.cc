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

#include "behavior.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "parallel.h"
#include "status.h"

namespace mecdt {

BehaviorKind PolicyMix::ForEpisode(int episode, int episodes) const {
  const double total = random + proportional + hillclimb;
  Require(total > 0, "policy mix must have positive weight");
  const double u = (episode + 0.5) / episodes * total;
  if (u < random) return BehaviorKind::kRandom;
  if (u < random + proportional) return BehaviorKind::kProportional;
  return BehaviorKind::kHillclimb;
}

Action RandomPolicy(int active_users, int max_users, Rng& rng) {
  Require(active_users >= 0 && active_users <= max_users,
          "active users exceed max_users");
  Action a(ActionDim(max_users), 0.0);
  for (int i = 0; i < active_users * kActionPerUser; ++i) a[i] = Uniform01(rng);
  return a;
}

Action DemandProportionalPolicy(const SystemConfig& cfg,
                                std::span<const double> raw_state,
                                std::span<const UserProfile> profiles) {
  const int users = static_cast<int>(profiles.size());
  Require(users >= 1 && users <= cfg.max_users, "bad active user count");
  Require(static_cast<int>(raw_state.size()) >= RawStateDim(cfg.max_users),
          "state too short");
  std::vector<double> bits(users, 0.0);
  std::vector<double> cycles(users, 0.0);
  for (int k = 0; k < users; ++k) {
    const double* slot = raw_state.data() + k * kStatePerUser;
    for (int a = 0; a < kAttentionLevels; ++a) {
      const double demand = slot[4 + a] * profiles[k].thresholds[a];
      bits[k] += demand;
      cycles[k] += demand * cfg.cycles_per_bit[a];
    }
  }
  const double bit_sum = std::accumulate(bits.begin(), bits.end(), 0.0);
  const double cycle_sum = std::accumulate(cycles.begin(), cycles.end(), 0.0);
  Action act(ActionDim(cfg.max_users), 0.0);
  for (int k = 0; k < users; ++k) {
    double* slot = act.data() + k * kActionPerUser;
    slot[0] = slot[1] = slot[2] = 1.0;
    slot[3] = bit_sum > 0 ? bits[k] / bit_sum : 1.0 / users;
    slot[4] = cycle_sum > 0 ? cycles[k] / cycle_sum : 1.0 / users;
  }
  return act;
}

Action HillclimbPolicy(const MecEnv& env, int iters, Rng& rng) {
  Action x = DemandProportionalPolicy(env.config(), env.state(), env.profiles());
  if (iters <= 0) return x;
  double best = env.Evaluate(x).reward;
  std::vector<int> order(env.spec().users() * kActionPerUser);
  std::iota(order.begin(), order.end(), 0);
  double step = 0.25;
  int used = 0;
  while (used < iters && step >= 1.0 / 1024) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (int c : order) {
      if (used >= iters) break;
      for (double dir : {1.0, -1.0}) {
        const double cand = std::clamp(x[c] + dir * step, 0.0, 1.0);
        if (cand == x[c]) continue;
        ++used;
        const double old = x[c];
        x[c] = cand;
        const double r = env.Evaluate(x).reward;
        if (r > best) {
          best = r;
          improved = true;
          break;
        }
        x[c] = old;
        if (used >= iters) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

Action BehaviorAction(BehaviorKind kind, const MecEnv& env, int iters,
                      Rng& rng) {
  switch (kind) {
    case BehaviorKind::kRandom:
      return RandomPolicy(env.spec().users(), env.config().max_users, rng);
    case BehaviorKind::kProportional:
      return DemandProportionalPolicy(env.config(), env.state(), env.profiles());
    case BehaviorKind::kHillclimb:
      return HillclimbPolicy(env, iters, rng);
  }
  return {};
}

uint64_t EpisodeSeed(const EnvSpec& spec, int episode) {
  return DeriveSeed(spec.seed, {0x6570, static_cast<uint64_t>(episode)});
}

Rollout RunBehaviorEpisode(const SystemConfig& cfg, const EnvSpec& spec,
                           BehaviorKind kind, int hillclimb_iters,
                           uint64_t policy_seed) {
  MecEnv env(cfg);
  env.Reset(spec);
  Rng rng(policy_seed);
  Rollout out;
  out.trajectory.env_id = spec.LevelId();
  out.min_qoe = std::numeric_limits<double>::infinity();
  while (!env.done()) {
    TrajectoryStep step;
    step.t = env.step_index();
    step.state = env.state();
    step.action = BehaviorAction(kind, env, hillclimb_iters, rng);
    const StepResult res = env.Step(step.action);
    step.reward = res.reward;
    out.min_qoe = std::min(out.min_qoe, res.report.MinQoe());
    out.trajectory.Append(std::move(step));
  }
  return out;
}

DatasetShard CollectDataset(const SystemConfig& cfg, int mec_id,
                            std::span<const EnvSpec> specs,
                            const PolicyMix& mix, int episodes_per_env,
                            uint64_t seed, int threads) {
  Require(episodes_per_env >= 1, "episodes_per_env must be >= 1");
  for (const auto& s : specs) {
    Require(s.users() >= 1 && s.users() <= cfg.max_users,
            "env spec user count out of range");
  }
  std::vector<EnvDataset> results(specs.size());
  ParallelFor(static_cast<int>(specs.size()), threads, [&](int i) {
    EnvDataset& env = results[i];
    env.spec = specs[i];
    for (int ep = 0; ep < episodes_per_env; ++ep) {
      EnvSpec episode = specs[i];
      episode.seed = EpisodeSeed(specs[i], ep);
      const uint64_t policy_seed =
          DeriveSeed(seed, {0x706f6c, specs[i].seed, static_cast<uint64_t>(ep)});
      env.trajectories.push_back(
          RunBehaviorEpisode(cfg, episode, mix.ForEpisode(ep, episodes_per_env),
                             mix.hillclimb_iters, policy_seed)
              .trajectory);
    }
  });
  DatasetShard shard;
  shard.mec_id = mec_id;
  shard.max_users = cfg.max_users;
  for (auto& env : results) {
    const std::string id = env.spec.LevelId();
    Require(!shard.envs.contains(id), "duplicate env level tuple " + id);
    shard.envs.emplace(id, std::move(env));
  }
  return shard;
}

}  // namespace mecdt
