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

#include "evalharness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "parallel.h"
#include "status.h"

namespace mecdt {

DtController::DtController(std::shared_ptr<const ModelParams> params)
    : params_(std::move(params)) {
  Require(params_ != nullptr, "controller needs model parameters");
}

void DtController::Begin(const MecEnv& env, double rtg_target) {
  const ModelConfig& m = params_->config();
  if (env.config().max_users != m.max_users()) {
    Fail(ErrorCode::kInvalidArgument,
         "environment max_users " + std::to_string(env.config().max_users) +
             " does not match the model (state/action dims " +
             std::to_string(m.state_dim) + "/" + std::to_string(m.action_dim) + ")");
  }
  const auto& levels = env.spec().levels;
  const StateVec s0 = AugmentState(env.state(), levels, m.max_users());
  rtg_target_ = rtg_target;
  spent_ = 0.0;
  rtg_ = rtg_target;
  prompt_ = BuildExecutionPrompt(rtg_target, s0, env.spec().users(),
                                 m.max_users(), m.prompt_len);
  context_.clear();
  context_.push_back({rtg_, s0, Action(m.action_dim, 0.0), env.step_index()});
}

Action DtController::Act(const MecEnv& env) {
  return PredictNextAction(*params_, prompt_, context_, env.spec().users());
}

void DtController::Observe(const MecEnv& env, const Action& action, double reward) {
  const ModelConfig& m = params_->config();
  context_.back().action = action;
  spent_ += reward;
  rtg_ = rtg_target_ - spent_;
  if (env.done()) return;
  context_.push_back({rtg_, AugmentState(env.state(), env.spec().levels, m.max_users()),
                      Action(m.action_dim, 0.0), env.step_index()});
  if (static_cast<int>(context_.size()) > m.context_len) {
    context_.erase(context_.begin(), context_.end() - m.context_len);
  }
}

BehaviorController::BehaviorController(BehaviorKind kind, int hillclimb_iters,
                                       uint64_t seed)
    : kind_(kind), iters_(hillclimb_iters), rng_(seed) {}

Action BehaviorController::Act(const MecEnv& env) {
  return BehaviorAction(kind_, env, iters_, rng_);
}

EpisodeResult Rollout(Controller& controller, const SystemConfig& cfg,
                      const EnvSpec& spec, double rtg_target) {
  EpisodeResult r;
  r.env_id = spec.LevelId();
  r.trajectory.env_id = r.env_id;
  r.min_qoe = std::numeric_limits<double>::infinity();
  try {
    MecEnv env(cfg);
    env.Reset(spec);
    controller.Begin(env, rtg_target);
    double spent = 0.0;
    while (!env.done()) {
      const int t = env.step_index();
      const StateVec state = env.state();
      const Action action = controller.Act(env);
      const StepResult res = env.Step(action);
      controller.Observe(env, action, res.reward);
      const double min_qoe = res.report.MinQoe();
      r.steps.push_back({t, res.reward, rtg_target - spent, min_qoe, res.report.hfqoe});
      r.trajectory.Append({t, res.reward, state, action});
      r.min_qoe = std::min(r.min_qoe, min_qoe);
      spent += res.reward;
    }
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.ep = r.trajectory.ep_reward;
  r.ma = r.steps.empty() ? 0.0 : r.ep / static_cast<double>(r.steps.size());
  if (r.steps.empty()) r.min_qoe = 0.0;
  return r;
}

Stat Summarize(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

nlohmann::json GroupSummary::ToJson() const {
  return {{"episodes", episodes},
          {"failed", failed},
          {"MA", ma.ToJson()},
          {"EP", ep.ToJson()},
          {"min_qoe", min_qoe.ToJson()}};
}

GroupSummary SummarizeEpisodes(std::span<const EpisodeResult> eps) {
  GroupSummary g;
  std::vector<double> ma, ep, q;
  for (const auto& e : eps) {
    ++g.episodes;
    if (e.failed) {
      ++g.failed;
      continue;
    }
    ma.push_back(e.ma);
    ep.push_back(e.ep);
    q.push_back(e.min_qoe);
  }
  g.ma = Summarize(ma);
  g.ep = Summarize(ep);
  g.min_qoe = Summarize(q);
  return g;
}

nlohmann::json SuiteResult::ToJson() const {
  nlohmann::json j;
  j["overall"] = overall.ToJson();
  j["per_mec"] = nlohmann::json::array();
  for (const auto& [mec, g] : per_mec) {
    nlohmann::json m = g.ToJson();
    m["mec_id"] = mec;
    j["per_mec"].push_back(m);
  }
  return j;
}

SuiteResult EvaluateSuite(const ControllerFactory& factory,
                          const SystemConfig& cfg,
                          std::span<const Scenario> scenarios, int episodes,
                          double rtg_target, int threads) {
  Require(episodes >= 1, "episodes must be >= 1");
  struct Job {
    int mec_id;
    const EnvSpec* spec;
    int episode;
  };
  std::vector<Job> jobs;
  for (const auto& sc : scenarios) {
    for (const auto& spec : sc.specs) {
      for (int j = 0; j < episodes; ++j) jobs.push_back({sc.mec_id, &spec, j});
    }
  }
  Require(!jobs.empty(), "evaluation suite has no environments");
  SuiteResult out;
  out.episodes.resize(jobs.size());
  ParallelFor(static_cast<int>(jobs.size()), threads, [&](int i) {
    const Job& job = jobs[i];
    EnvSpec episode = *job.spec;
    episode.seed = EpisodeSeed(*job.spec, job.episode);
    auto controller = factory(*job.spec, job.episode);
    EpisodeResult r = Rollout(*controller, cfg, episode, rtg_target);
    r.mec_id = job.mec_id;
    r.episode = job.episode;
    out.episodes[i] = std::move(r);
  });
  out.overall = SummarizeEpisodes(out.episodes);
  std::map<int, std::vector<EpisodeResult>> by_mec;
  for (const auto& e : out.episodes) by_mec[e.mec_id].push_back(e);
  for (const auto& [mec, eps] : by_mec) {
    out.per_mec.emplace_back(mec, SummarizeEpisodes(eps));
  }
  return out;
}

ControllerFactory DtFactory(std::shared_ptr<const ModelParams> params) {
  return [params](const EnvSpec&, int) -> std::unique_ptr<Controller> {
    return std::make_unique<DtController>(params);
  };
}

ControllerFactory BehaviorMixFactory(const PolicyMix& mix, int episodes,
                                     uint64_t seed) {
  return [mix, episodes, seed](const EnvSpec& spec,
                               int episode) -> std::unique_ptr<Controller> {
    return std::make_unique<BehaviorController>(
        mix.ForEpisode(episode, episodes), mix.hillclimb_iters,
        DeriveSeed(seed, {spec.seed, static_cast<uint64_t>(episode)}));
  };
}

void WriteEpisodeCsv(std::ostream& out, std::span<const EpisodeResult> eps) {
  out << "mec,env,episode,step,reward,rtg,min_qoe,hfqoe\n";
  out.precision(17);
  for (const auto& e : eps) {
    for (const auto& s : e.steps) {
      out << e.mec_id << ',' << e.env_id << ',' << e.episode << ',' << s.step
          << ',' << s.reward << ',' << s.rtg << ',' << s.min_qoe << ','
          << s.hfqoe << '\n';
    }
  }
}

SweepAxis ParseSweepAxis(const std::string& name) {
  if (name == "qoe_th") return SweepAxis::kQoeTh;
  if (name == "hfqoe_th") return SweepAxis::kHfqoeTh;
  if (name == "bandwidth") return SweepAxis::kBandwidth;
  if (name == "frequency") return SweepAxis::kFrequency;
  if (name == "rtg") return SweepAxis::kRtg;
  if (name == "prompt_len") return SweepAxis::kPromptLen;
  Fail(ErrorCode::kInvalidArgument,
       "unknown sweep axis '" + name +
           "' (expected qoe_th, hfqoe_th, bandwidth, frequency, rtg, prompt_len)");
}

std::string SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kQoeTh: return "qoe_th";
    case SweepAxis::kHfqoeTh: return "hfqoe_th";
    case SweepAxis::kBandwidth: return "bandwidth";
    case SweepAxis::kFrequency: return "frequency";
    case SweepAxis::kRtg: return "rtg";
    case SweepAxis::kPromptLen: return "prompt_len";
  }
  return "";
}

std::vector<double> DefaultGrid(SweepAxis axis) {
  auto range = [](double lo, double hi, double step) {
    std::vector<double> v;
    const int n = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
    return v;
  };
  switch (axis) {
    case SweepAxis::kQoeTh: return range(0.90, 1.10, 0.05);
    case SweepAxis::kHfqoeTh: return range(0.70, 0.90, 0.05);
    case SweepAxis::kBandwidth: return range(6, 14, 2);
    case SweepAxis::kFrequency: return range(11, 19, 2);
    case SweepAxis::kRtg: return range(500, 1100, 50);
    case SweepAxis::kPromptLen: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  }
  return {};
}

std::vector<SweepRow> Sweep(const ModelParams& params, const SystemConfig& cfg,
                            std::span<const Scenario> scenarios, SweepAxis axis,
                            std::span<const double> grid, int episodes,
                            double rtg_target, int threads) {
  Require(!grid.empty(), "sweep grid is empty");
  std::vector<SweepRow> rows;
  for (double v : grid) {
    SystemConfig c = cfg;
    double rtg = rtg_target;
    auto p = std::make_shared<const ModelParams>(params);
    switch (axis) {
      case SweepAxis::kQoeTh: c.qoe_threshold = v; break;
      case SweepAxis::kHfqoeTh: c.hfqoe_threshold = v; break;
      case SweepAxis::kBandwidth: c.total_bandwidth = v * 1e6; break;
      case SweepAxis::kFrequency: c.total_frequency = v * 1e9; break;
      case SweepAxis::kRtg: rtg = v; break;
      case SweepAxis::kPromptLen: {
        Require(v >= 1 && v == std::floor(v), "prompt_len grid values must be integers >= 1");
        p = std::make_shared<const ModelParams>(params.WithPromptLen(static_cast<int>(v)));
        break;
      }
    }
    try {
      c.Validate();
    } catch (const Error& e) {
      Fail(ErrorCode::kInvalidArgument, "invalid sweep value " + std::to_string(v) +
                                            " for " + SweepAxisName(axis) + ": " + e.what());
    }
    const SuiteResult r = EvaluateSuite(DtFactory(p), c, scenarios, episodes, rtg, threads);
    for (const auto& [mec, g] : r.per_mec) rows.push_back({v, mec, g});
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows) {
  out << "axis,axis_value,mec_id,MA,MA_std,EP,EP_std,min_qoe,min_qoe_std\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << SweepAxisName(axis) << ',' << r.axis_value << ',' << r.mec_id << ',' << r.summary.ma.mean << ','
        << r.summary.ma.std << ',' << r.summary.ep.mean << ',' << r.summary.ep.std
        << ',' << r.summary.min_qoe.mean << ',' << r.summary.min_qoe.std << '\n';
  }
}

}  // namespace mecdt
