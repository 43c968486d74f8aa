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

#ifndef MECDT_ENV_H_
#define MECDT_ENV_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gaze.h"
#include "physics.h"
#include "rng.h"
#include "system_config.h"
#include "types.h"

namespace mecdt {

// One user environment: how many users a server hosts, their levels, and the
// seed that fixes positions, gaze and channel draws of its episodes.
struct EnvSpec {
  std::vector<UserLevel> levels;
  uint64_t seed = 0;

  int users() const { return static_cast<int>(levels.size()); }
  // "K3-PAS": user count and level letters; identifies the level tuple.
  std::string LevelId() const;
  std::vector<UserProfile> Profiles(const SystemConfig& cfg) const;
};

struct UserStepReport {
  UserLevel level = UserLevel::kStandard;
  AttentionMap amap;
  TileBits bits;
  double bandwidth = 0.0;
  double frequency = 0.0;
  double rate = 0.0;
  double download_latency = 0.0;
  double render_latency = 0.0;
  double latency = 0.0;
  double qoe = 0.0;
  bool link_saturated = false;
  bool compute_saturated = false;
};

struct StepReport {
  int step = 0;
  std::vector<UserStepReport> users;
  double hfqoe = 1.0;
  double reward = 0.0;
  int qoe_penalties = 0;
  bool hfqoe_penalized = false;

  double MinQoe() const;
};

struct StepResult {
  StateVec next_state;  // raw state, RawStateDim(max_users) entries
  double reward = 0.0;
  StepReport report;
  bool done = false;
};

// Simulates one MEC server. Owns its RNG; single-threaded.
//
// Raw state layout, per user slot k (11 values, zero for inactive slots):
//   [N_1, N_2, N_3, QoE]  previous snapshot
//   [N_1, N_2, N_3, QoE]  current snapshot: tiles of the upcoming GoP and the
//                         QoE achieved on the last step
//   [T_d, T_r, T]         latencies of the last step
// followed by hfQoE of the previous and current snapshot.
class MecEnv {
 public:
  explicit MecEnv(SystemConfig cfg);

  // Gaze traces to draw users from instead of the synthetic generator.
  void SetGazeLibrary(std::shared_ptr<const std::vector<GazeTrace>> traces);

  StateVec Reset(const EnvSpec& spec);
  StepResult Step(std::span<const double> action);
  // Outcome of applying 'action' now without advancing the episode.
  StepReport Evaluate(std::span<const double> action) const;

  const SystemConfig& config() const { return cfg_; }
  const EnvSpec& spec() const { return spec_; }
  const StateVec& state() const { return state_; }
  const std::vector<UserProfile>& profiles() const { return profiles_; }
  const std::vector<AttentionMap>& attention() const { return amaps_; }
  const std::vector<ChannelState>& channels() const { return channels_; }
  int step_index() const { return step_; }
  bool done() const { return step_ >= cfg_.episode_len; }

 private:
  void SampleChannels();
  void LoadAttention();
  void WriteState(const StepReport* last);

  SystemConfig cfg_;
  EnvSpec spec_;
  std::shared_ptr<const std::vector<GazeTrace>> gaze_library_;
  std::vector<UserProfile> profiles_;
  std::vector<GazeTrace> gaze_;
  std::vector<int> gaze_offset_;
  std::vector<AttentionMap> amaps_;
  std::vector<ChannelState> channels_;
  std::vector<double> qoe_sum_;
  Rng rng_;
  StateVec state_;
  double hfqoe_ = 1.0;
  int step_ = 0;
  bool has_spec_ = false;
};

// One CSV row per (step, user):
// step,user,level,N1,N2,N3,b1,b2,b3,B,f,rate,T_d,T_r,T,qoe,hfqoe,reward
void WriteStepReportHeader(std::ostream& out);
void WriteStepReportRows(std::ostream& out, const StepReport& report);

}  // namespace mecdt

#endif  // MECDT_ENV_H_
