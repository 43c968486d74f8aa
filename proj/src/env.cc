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

#include "env.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "status.h"

namespace mecdt {

std::string EnvSpec::LevelId() const {
  std::string id = "K" + std::to_string(users()) + "-";
  for (UserLevel l : levels) id += LevelLetter(l);
  return id;
}

std::vector<UserProfile> EnvSpec::Profiles(const SystemConfig& cfg) const {
  std::vector<UserProfile> out;
  out.reserve(levels.size());
  for (UserLevel l : levels) out.push_back(cfg.Profile(l));
  return out;
}

double StepReport::MinQoe() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& u : users) m = std::min(m, u.qoe);
  return m;
}

MecEnv::MecEnv(SystemConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.Validate();
  if (cfg_.gaze_library) SetGazeLibrary(cfg_.gaze_library);
}

void MecEnv::SetGazeLibrary(
    std::shared_ptr<const std::vector<GazeTrace>> traces) {
  if (traces) {
    for (const auto& t : *traces) {
      Require(!t.empty(), "gaze library contains an empty trace");
    }
  }
  gaze_library_ = std::move(traces);
}

StateVec MecEnv::Reset(const EnvSpec& spec) {
  Require(spec.users() >= 1 && spec.users() <= cfg_.max_users,
          "user count must be in [1, " + std::to_string(cfg_.max_users) +
              "], got " + std::to_string(spec.users()));
  spec_ = spec;
  has_spec_ = true;
  profiles_ = spec.Profiles(cfg_);
  rng_.seed(DeriveSeed(spec.seed, {0x656e76}));
  step_ = 0;
  hfqoe_ = 1.0;

  const int users = spec.users();
  channels_.assign(users, ChannelState{});
  std::uniform_real_distribution<double> ux(cfg_.user_x_min, cfg_.user_x_max);
  std::uniform_real_distribution<double> uy(cfg_.user_y_min, cfg_.user_y_max);
  for (auto& ch : channels_) {
    const double x = ux(rng_);
    const double y = uy(rng_);
    ch.distance = std::hypot(x, y);
    ch.interference = cfg_.interference;
  }

  gaze_.clear();
  gaze_offset_.assign(users, 0);
  const int frames = cfg_.episode_len * cfg_.frames_per_gop;
  for (int k = 0; k < users; ++k) {
    if (gaze_library_ && !gaze_library_->empty()) {
      const auto& lib = *gaze_library_;
      const size_t pick = (spec.seed + static_cast<uint64_t>(k)) % lib.size();
      gaze_.push_back(lib[pick]);
      gaze_offset_[k] = static_cast<int>(
          std::uniform_int_distribution<size_t>(0, lib[pick].size() - 1)(rng_));
    } else {
      gaze_.push_back(SynthGaze(DeriveSeed(spec.seed, {0x67617a65, uint64_t(k)}),
                                frames, cfg_.gaze_step_sigma));
    }
  }

  qoe_sum_.assign(users, 0.0);
  SampleChannels();
  LoadAttention();
  WriteState(nullptr);
  return state_;
}

void MecEnv::SampleChannels() {
  std::exponential_distribution<double> rayleigh_power(1.0);
  for (auto& ch : channels_) {
    double h = rayleigh_power(rng_);
    // exponential_distribution may return 0 on some platforms; h must be > 0.
    if (h <= 0.0) h = std::numeric_limits<double>::min();
    ch.gain = h;
  }
}

void MecEnv::LoadAttention() {
  amaps_.resize(spec_.users());
  for (int k = 0; k < spec_.users(); ++k) {
    // Offsets are in frames; convert the GoP index accordingly.
    const GazeTrace& trace = gaze_[k];
    const int gop = step_ + gaze_offset_[k] / cfg_.frames_per_gop;
    amaps_[k] = ComputeAttentionMap(trace, gop, cfg_.grid_rows, cfg_.grid_cols,
                                    cfg_.frames_per_gop);
  }
}

StepReport MecEnv::Evaluate(std::span<const double> action) const {
  Require(has_spec_, "environment has not been reset");
  const int users = spec_.users();
  const Allocation alloc = DecodeAction(action, users, cfg_, profiles_);

  StepReport report;
  report.step = step_;
  report.users.resize(users);
  std::vector<double> qoe(users);
  std::vector<double> avg(users);
  const double saturated = 2.0 * cfg_.latency_threshold;
  for (int k = 0; k < users; ++k) {
    UserStepReport& u = report.users[k];
    u.level = profiles_[k].level;
    u.amap = amaps_[k];
    std::array<double, kAttentionLevels> ratios{};
    for (int a = 0; a < kAttentionLevels; ++a) {
      ratios[a] = action[k * kActionPerUser + a];
    }
    u.bits = ComputeTileBits(profiles_[k], ratios, u.amap, cfg_.frames_per_gop);
    u.bandwidth = alloc.bandwidth[k];
    u.frequency = alloc.frequency[k];
    u.rate = TransmissionRate(cfg_, u.bandwidth, channels_[k]);

    if (u.bits.gop == 0.0) {
      u.download_latency = 0.0;
      u.render_latency = 0.0;
    } else {
      const double rate_bias = cfg_.rate_bias_frac * u.rate;
      const double freq_bias = cfg_.freq_bias_frac * u.frequency;
      if (u.rate - rate_bias > 0.0) {
        u.download_latency = DownloadLatency(u.bits.gop, cfg_.compression_ratio,
                                             u.rate, rate_bias);
      } else {
        u.download_latency = saturated;
        u.link_saturated = true;
      }
      if (u.frequency - freq_bias > 0.0) {
        u.render_latency =
            RenderLatency(u.bits.per_level, cfg_, u.frequency, freq_bias);
      } else {
        u.render_latency = saturated;
        u.compute_saturated = true;
      }
    }
    u.latency = TotalLatency(u.download_latency, u.render_latency);
    u.qoe = Qoe(u.latency, cfg_, profiles_[k], u.amap, u.bits.per_tile);
    qoe[k] = u.qoe;
    avg[k] = (qoe_sum_[k] + u.qoe) / (step_ + 1);
    if (u.qoe < cfg_.qoe_threshold) ++report.qoe_penalties;
  }
  report.hfqoe = Hfqoe(avg);
  report.hfqoe_penalized = report.hfqoe < cfg_.hfqoe_threshold;
  report.reward = Reward(qoe, report.hfqoe, cfg_);
  return report;
}

StepResult MecEnv::Step(std::span<const double> action) {
  Require(has_spec_, "environment has not been reset");
  Require(!done(), "episode already terminated");
  StepResult out;
  out.report = Evaluate(action);
  for (int k = 0; k < spec_.users(); ++k) qoe_sum_[k] += out.report.users[k].qoe;
  hfqoe_ = out.report.hfqoe;
  ++step_;
  SampleChannels();
  LoadAttention();
  WriteState(&out.report);
  out.next_state = state_;
  out.reward = out.report.reward;
  out.done = done();
  return out;
}

void MecEnv::WriteState(const StepReport* last) {
  const int kmax = cfg_.max_users;
  StateVec prev = state_;
  const bool first = last == nullptr;
  state_.assign(RawStateDim(kmax), 0.0);
  for (int k = 0; k < spec_.users(); ++k) {
    double* slot = state_.data() + k * kStatePerUser;
    for (int a = 0; a < kAttentionLevels; ++a) slot[4 + a] = amaps_[k].counts[a];
    if (!first) {
      const UserStepReport& u = last->users[k];
      slot[7] = u.qoe;
      slot[8] = u.download_latency;
      slot[9] = u.render_latency;
      slot[10] = u.latency;
      for (int i = 0; i < 4; ++i) slot[i] = prev[k * kStatePerUser + 4 + i];
    } else {
      for (int i = 0; i < 4; ++i) slot[i] = slot[4 + i];
    }
  }
  const int tail = kStatePerUser * kmax;
  state_[tail] = first ? hfqoe_ : prev[tail + 1];
  state_[tail + 1] = hfqoe_;
}

void WriteStepReportHeader(std::ostream& out) {
  out << "step,user,level,N1,N2,N3,b1,b2,b3,B,f,rate,T_d,T_r,T,qoe,hfqoe,"
         "reward\n";
}

void WriteStepReportRows(std::ostream& out, const StepReport& report) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (size_t k = 0; k < report.users.size(); ++k) {
    const UserStepReport& u = report.users[k];
    out << report.step << ',' << k << ',' << LevelName(u.level) << ','
        << u.amap.counts[0] << ',' << u.amap.counts[1] << ','
        << u.amap.counts[2] << ',' << u.bits.per_tile[0] << ','
        << u.bits.per_tile[1] << ',' << u.bits.per_tile[2] << ','
        << u.bandwidth << ',' << u.frequency << ',' << u.rate << ','
        << u.download_latency << ',' << u.render_latency << ',' << u.latency
        << ',' << u.qoe << ',' << report.hfqoe << ',' << report.reward << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace mecdt
