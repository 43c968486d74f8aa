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

#ifndef MECDT_TRAJECTORY_H_
#define MECDT_TRAJECTORY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "env.h"
#include "rng.h"
#include "types.h"

namespace mecdt {

struct TrajectoryStep {
  int t = 0;
  double reward = 0.0;
  StateVec state;  // raw state, zero padded to K_max
  Action action;
};

struct Trajectory {
  std::string env_id;
  std::vector<TrajectoryStep> steps;
  double ep_reward = 0.0;  // sum of step rewards, kept in sync by Append

  int length() const { return static_cast<int>(steps.size()); }
  void Append(TrajectoryStep step);
  std::vector<double> Rewards() const;
};

// One (reward-to-go, augmented state, action) triple of a model input
// sequence, tagged with its episode timestep.
struct SeqStep {
  double rtg = 0.0;
  StateVec state;
  Action action;
  int timestep = 0;
};

using Prompt = std::vector<SeqStep>;

struct EnvDataset {
  EnvSpec spec;  // levels plus the base seed its episodes were derived from
  std::vector<Trajectory> trajectories;
};

struct DatasetShard {
  int mec_id = 0;
  int max_users = 0;
  std::map<std::string, EnvDataset> envs;  // keyed by EnvSpec::LevelId()

  int64_t SampleCount() const;  // total trajectory steps
  int TrajectoryCount() const;
};

// out[t] = sum of rewards[t..]. Throws on empty input.
std::vector<double> RewardsToGo(std::span<const double> rewards);

// Index of the trajectory with the largest episode reward (first on ties).
size_t Top1Index(std::span<const Trajectory> trajs);
const Trajectory& Top1(std::span<const Trajectory> trajs);

// Appends the user-information vector U (0.6 / 0.4 / 0.2 per active user's
// level, 0 for padding slots) to a raw state.
StateVec AugmentState(std::span<const double> raw,
                      std::span<const UserLevel> levels, int max_users);

// Contiguous length-L_pr segment of 'top' starting at i ~ U[0, L - L_pr)
// (i = 0 when L == L_pr), with augmented states and source timesteps.
Prompt SampleTrainingPrompt(const Trajectory& top,
                            std::span<const UserLevel> levels, int max_users,
                            int prompt_len, Rng& rng);
// Same segment with an explicit start index.
Prompt TrainingPromptAt(const Trajectory& top,
                        std::span<const UserLevel> levels, int max_users,
                        int prompt_len, int start);

// L_pr copies of (rtg_target, s0, A*) where A* requests everything for the
// active users and zero for padding. Timestep tags are 0.
Prompt BuildExecutionPrompt(double rtg_target, std::span<const double> s0,
                            int active_users, int max_users, int prompt_len);

// Length-L window of a trajectory as model input, starting at 'start'.
std::vector<SeqStep> TrajectoryWindow(const Trajectory& traj,
                                      std::span<const UserLevel> levels,
                                      int max_users, int start, int len);

void SaveShard(const DatasetShard& shard, const std::filesystem::path& path);
// Throws Error(kIntegrity) on version or checksum mismatch.
DatasetShard LoadShard(const std::filesystem::path& path);
// SHA-256 of the encoded shard; equals the digest of the file SaveShard writes.
std::string ShardDigest(const DatasetShard& shard);

}  // namespace mecdt

#endif  // MECDT_TRAJECTORY_H_
