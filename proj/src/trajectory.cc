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

#include "trajectory.h"

#include <algorithm>

#include "container.h"
#include "status.h"

namespace mecdt {

void Trajectory::Append(TrajectoryStep step) {
  Require(step.t == length(), "trajectory timesteps must be contiguous from 0");
  ep_reward += step.reward;
  steps.push_back(std::move(step));
}

std::vector<double> Trajectory::Rewards() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.reward);
  return out;
}

int64_t DatasetShard::SampleCount() const {
  int64_t n = 0;
  for (const auto& [id, env] : envs) {
    for (const auto& t : env.trajectories) n += t.length();
  }
  return n;
}

int DatasetShard::TrajectoryCount() const {
  int n = 0;
  for (const auto& [id, env] : envs) n += static_cast<int>(env.trajectories.size());
  return n;
}

std::vector<double> RewardsToGo(std::span<const double> rewards) {
  Require(!rewards.empty(), "rewards_to_go needs a non-empty reward list");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc += rewards[i];
    out[i] = acc;
  }
  return out;
}

size_t Top1Index(std::span<const Trajectory> trajs) {
  Require(!trajs.empty(), "top-1 selection needs at least one trajectory");
  size_t best = 0;
  for (size_t i = 1; i < trajs.size(); ++i) {
    if (trajs[i].ep_reward > trajs[best].ep_reward) best = i;
  }
  return best;
}

const Trajectory& Top1(std::span<const Trajectory> trajs) {
  return trajs[Top1Index(trajs)];
}

StateVec AugmentState(std::span<const double> raw,
                      std::span<const UserLevel> levels, int max_users) {
  Require(static_cast<int>(levels.size()) <= max_users,
          "more users than max_users");
  StateVec out(raw.begin(), raw.end());
  out.resize(raw.size() + max_users, 0.0);
  for (size_t k = 0; k < levels.size(); ++k) {
    out[raw.size() + k] = LevelCode(levels[k]);
  }
  return out;
}

std::vector<SeqStep> TrajectoryWindow(const Trajectory& traj,
                                      std::span<const UserLevel> levels,
                                      int max_users, int start, int len) {
  Require(start >= 0 && len >= 1 && start + len <= traj.length(),
          "trajectory window out of range");
  // Reward-to-go is taken over the whole source trajectory.
  const auto rtg = RewardsToGo(traj.Rewards());
  std::vector<SeqStep> out;
  out.reserve(len);
  for (int i = start; i < start + len; ++i) {
    const auto& s = traj.steps[i];
    out.push_back({rtg[i], AugmentState(s.state, levels, max_users), s.action, s.t});
  }
  return out;
}

Prompt TrainingPromptAt(const Trajectory& top,
                        std::span<const UserLevel> levels, int max_users,
                        int prompt_len, int start) {
  Require(prompt_len >= 1, "prompt length must be >= 1");
  if (top.length() < prompt_len) {
    Fail(ErrorCode::kInvalidArgument,
         "trajectory of length " + std::to_string(top.length()) +
             " is shorter than the prompt length " + std::to_string(prompt_len));
  }
  return TrajectoryWindow(top, levels, max_users, start, prompt_len);
}

Prompt SampleTrainingPrompt(const Trajectory& top,
                            std::span<const UserLevel> levels, int max_users,
                            int prompt_len, Rng& rng) {
  Require(prompt_len >= 1, "prompt length must be >= 1");
  if (top.length() < prompt_len) {
    Fail(ErrorCode::kInvalidArgument,
         "trajectory of length " + std::to_string(top.length()) +
             " is shorter than the prompt length " + std::to_string(prompt_len));
  }
  const int span = top.length() - prompt_len;
  const int start =
      span == 0 ? 0 : std::uniform_int_distribution<int>(0, span - 1)(rng);
  return TrainingPromptAt(top, levels, max_users, prompt_len, start);
}

Prompt BuildExecutionPrompt(double rtg_target, std::span<const double> s0,
                            int active_users, int max_users, int prompt_len) {
  Require(active_users >= 0 && active_users <= max_users,
          "active users (" + std::to_string(active_users) +
              ") exceed max_users (" + std::to_string(max_users) + ")");
  Require(prompt_len >= 1, "prompt length must be >= 1");
  Action preferred(ActionDim(max_users), 0.0);
  std::fill(preferred.begin(), preferred.begin() + active_users * kActionPerUser,
            1.0);
  SeqStep step{rtg_target, StateVec(s0.begin(), s0.end()), preferred, 0};
  return Prompt(prompt_len, step);
}

namespace {

std::vector<int> LevelsToInts(const std::vector<UserLevel>& levels) {
  std::vector<int> out;
  for (UserLevel l : levels) out.push_back(static_cast<int>(l));
  return out;
}

Container ShardToContainer(const DatasetShard& shard) {
  Container c;
  c.kind = "shard";
  c.meta["mec_id"] = shard.mec_id;
  c.meta["max_users"] = shard.max_users;
  c.meta["raw_state_dim"] = RawStateDim(shard.max_users);
  c.meta["action_dim"] = ActionDim(shard.max_users);
  c.meta["envs"] = nlohmann::json::array();
  const int sdim = RawStateDim(shard.max_users);
  const int adim = ActionDim(shard.max_users);
  for (const auto& [id, env] : shard.envs) {
    nlohmann::json e;
    e["env_id"] = id;
    e["levels"] = LevelsToInts(env.spec.levels);
    e["seed"] = env.spec.seed;
    e["trajectories"] = env.trajectories.size();
    c.meta["envs"].push_back(e);

    NamedArray lengths{id + "/lengths", {}, {}};
    NamedArray t{id + "/t", {}, {}};
    NamedArray r{id + "/R", {}, {}};
    NamedArray s{id + "/S", {}, {}};
    NamedArray a{id + "/A", {}, {}};
    int64_t total = 0;
    for (const auto& traj : env.trajectories) {
      Require(traj.env_id == id, "trajectory env_id does not match its group");
      lengths.data.push_back(traj.length());
      for (const auto& step : traj.steps) {
        Require(static_cast<int>(step.state.size()) == sdim &&
                    static_cast<int>(step.action.size()) == adim,
                "trajectory step has wrong state/action size");
        t.data.push_back(step.t);
        r.data.push_back(step.reward);
        s.data.insert(s.data.end(), step.state.begin(), step.state.end());
        a.data.insert(a.data.end(), step.action.begin(), step.action.end());
      }
      total += traj.length();
    }
    lengths.shape = {static_cast<int64_t>(env.trajectories.size())};
    t.shape = {total};
    r.shape = {total};
    s.shape = {total, sdim};
    a.shape = {total, adim};
    for (auto* arr : {&lengths, &t, &r, &s, &a}) c.arrays.push_back(std::move(*arr));
  }
  return c;
}

}  // namespace

void SaveShard(const DatasetShard& shard, const std::filesystem::path& path) {
  WriteContainer(path, ShardToContainer(shard));
}

std::string ShardDigest(const DatasetShard& shard) {
  const auto bytes = EncodeContainer(ShardToContainer(shard));
  return Sha256Hex(bytes.data(), bytes.size());
}

DatasetShard LoadShard(const std::filesystem::path& path) {
  const Container c = ReadContainer(path, "shard");
  DatasetShard shard;
  try {
    shard.mec_id = c.meta.at("mec_id").get<int>();
    shard.max_users = c.meta.at("max_users").get<int>();
    const int sdim = RawStateDim(shard.max_users);
    const int adim = ActionDim(shard.max_users);
    if (c.meta.at("raw_state_dim").get<int>() != sdim ||
        c.meta.at("action_dim").get<int>() != adim) {
      Fail(ErrorCode::kIntegrity, "shard dimensions inconsistent with max_users");
    }
    for (const auto& e : c.meta.at("envs")) {
      const auto id = e.at("env_id").get<std::string>();
      EnvDataset env;
      for (int l : e.at("levels").get<std::vector<int>>()) {
        if (l < 0 || l > 2) Fail(ErrorCode::kIntegrity, "bad level code in shard");
        env.spec.levels.push_back(static_cast<UserLevel>(l));
      }
      env.spec.seed = e.at("seed").get<uint64_t>();
      const auto& lengths = c.Get(id + "/lengths").data;
      const auto& t = c.Get(id + "/t").data;
      const auto& r = c.Get(id + "/R").data;
      const auto& s = c.Get(id + "/S").data;
      const auto& a = c.Get(id + "/A").data;
      size_t row = 0;
      for (double len : lengths) {
        Trajectory traj;
        traj.env_id = id;
        for (int i = 0; i < static_cast<int>(len); ++i, ++row) {
          if (row >= t.size()) Fail(ErrorCode::kIntegrity, "shard arrays truncated");
          TrajectoryStep step;
          step.t = static_cast<int>(t[row]);
          step.reward = r[row];
          step.state.assign(s.begin() + row * sdim, s.begin() + (row + 1) * sdim);
          step.action.assign(a.begin() + row * adim, a.begin() + (row + 1) * adim);
          traj.Append(std::move(step));
        }
        env.trajectories.push_back(std::move(traj));
      }
      if (row != t.size()) Fail(ErrorCode::kIntegrity, "shard arrays inconsistent");
      shard.envs.emplace(id, std::move(env));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIntegrity, std::string("bad shard metadata: ") + e.what());
  }
  return shard;
}

}  // namespace mecdt
