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

#ifndef MECDT_EVALHARNESS_H_
#define MECDT_EVALHARNESS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "behavior.h"
#include "env.h"
#include "json.hpp"
#include "model.h"

namespace mecdt {

// Chooses allocation actions during an online episode.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void Begin(const MecEnv& env, double rtg_target) = 0;
  virtual Action Act(const MecEnv& env) = 0;
  // Called after each step with the applied action and its reward.
  virtual void Observe(const MecEnv& env, const Action& action, double reward) = 0;
};

// Online execution of the prompt decision transformer: execution prompt from
// (rtg_target, s0, all-ones action), context truncated to context_len, and
// reward-to-go decremented by each observed reward.
class DtController : public Controller {
 public:
  explicit DtController(std::shared_ptr<const ModelParams> params);
  void Begin(const MecEnv& env, double rtg_target) override;
  Action Act(const MecEnv& env) override;
  void Observe(const MecEnv& env, const Action& action, double reward) override;
  double rtg() const { return rtg_; }

 private:
  std::shared_ptr<const ModelParams> params_;
  Prompt prompt_;
  std::vector<SeqStep> context_;
  // Reward-to-go is target minus the running reward sum, so it telescopes
  // exactly.
  double rtg_target_ = 0.0;
  double spent_ = 0.0;
  double rtg_ = 0.0;
};

class BehaviorController : public Controller {
 public:
  BehaviorController(BehaviorKind kind, int hillclimb_iters, uint64_t seed);
  void Begin(const MecEnv&, double) override {}
  Action Act(const MecEnv& env) override;
  void Observe(const MecEnv&, const Action&, double) override {}

 private:
  BehaviorKind kind_;
  int iters_;
  Rng rng_;
};

class ConstantController : public Controller {
 public:
  explicit ConstantController(Action action) : action_(std::move(action)) {}
  void Begin(const MecEnv&, double) override {}
  Action Act(const MecEnv&) override { return action_; }
  void Observe(const MecEnv&, const Action&, double) override {}

 private:
  Action action_;
};

struct EvalStep {
  int step = 0;
  double reward = 0.0;
  double rtg = 0.0;  // reward-to-go conditioning used for this step
  double min_qoe = 0.0;
  double hfqoe = 0.0;
};

struct EpisodeResult {
  int mec_id = 0;
  std::string env_id;
  int episode = 0;
  double ep = 0.0;       // sum of step rewards
  double ma = 0.0;       // full-episode mean step reward
  double min_qoe = 0.0;  // min over steps of the per-step minimum user QoE
  bool failed = false;
  std::string error;
  std::vector<EvalStep> steps;
  Trajectory trajectory;
};

// Plays one episode of 'spec' for cfg.episode_len steps (T_te). Env errors
// become a failed record instead of propagating.
EpisodeResult Rollout(Controller& controller, const SystemConfig& cfg,
                      const EnvSpec& spec, double rtg_target);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  nlohmann::json ToJson() const { return {{"mean", mean}, {"std", std}}; }
};
Stat Summarize(std::span<const double> values);

struct GroupSummary {
  int episodes = 0;
  int failed = 0;
  Stat ma, ep, min_qoe;
  nlohmann::json ToJson() const;
};
GroupSummary SummarizeEpisodes(std::span<const EpisodeResult> eps);

struct SuiteResult {
  std::vector<EpisodeResult> episodes;  // ordered by (mec, env, episode)
  GroupSummary overall;
  std::vector<std::pair<int, GroupSummary>> per_mec;
  nlohmann::json ToJson() const;
};

// Builds a controller for episode 'episode' of 'spec'.
using ControllerFactory =
    std::function<std::unique_ptr<Controller>(const EnvSpec& spec, int episode)>;

// Scenario: a server id with the env specs evaluated on it.
struct Scenario {
  int mec_id = 0;
  std::vector<EnvSpec> specs;
};

// 'episodes' rollouts per env spec; episode j uses EpisodeSeed(spec, j).
SuiteResult EvaluateSuite(const ControllerFactory& factory,
                          const SystemConfig& cfg,
                          std::span<const Scenario> scenarios, int episodes,
                          double rtg_target, int threads = 1);

ControllerFactory DtFactory(std::shared_ptr<const ModelParams> params);
// Episode j of a spec plays the policy the mix assigns to it.
ControllerFactory BehaviorMixFactory(const PolicyMix& mix, int episodes,
                                     uint64_t seed);

// Per-episode CSV: mec,env,episode,step,reward,rtg,min_qoe,hfqoe
void WriteEpisodeCsv(std::ostream& out, std::span<const EpisodeResult> eps);

enum class SweepAxis { kQoeTh, kHfqoeTh, kBandwidth, kFrequency, kRtg, kPromptLen };
// Accepts qoe_th, hfqoe_th, bandwidth, frequency, rtg, prompt_len.
SweepAxis ParseSweepAxis(const std::string& name);
std::string SweepAxisName(SweepAxis axis);
// Default grid. Bandwidth is in MHz, frequency in GHz.
std::vector<double> DefaultGrid(SweepAxis axis);

struct SweepRow {
  double axis_value = 0.0;
  int mec_id = 0;
  GroupSummary summary;
};

// Re-evaluates the model with one quantity changed per grid point.
std::vector<SweepRow> Sweep(const ModelParams& params, const SystemConfig& cfg,
                            std::span<const Scenario> scenarios, SweepAxis axis,
                            std::span<const double> grid, int episodes,
                            double rtg_target, int threads = 1);
// axis,axis_value,mec_id,MA,MA_std,EP,EP_std,min_qoe,min_qoe_std
void WriteSweepCsv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows);

}  // namespace mecdt

#endif  // MECDT_EVALHARNESS_H_
