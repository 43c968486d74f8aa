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

#include "physics.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "status.h"

namespace mecdt {

double TransmissionRate(const SystemConfig& cfg, double bandwidth,
                        const ChannelState& ch) {
  Require(bandwidth >= 0, "bandwidth must be non-negative");
  if (bandwidth == 0.0) return 0.0;
  const double signal = cfg.transmit_power * ch.gain *
                        std::pow(ch.distance, -cfg.path_loss_exponent);
  const double snr = signal / (ch.interference + cfg.noise_power(bandwidth));
  return bandwidth * std::log1p(snr) / std::numbers::ln2;
}

TileBits ComputeTileBits(const UserProfile& profile,
                         const std::array<double, kAttentionLevels>& ratios,
                         const AttentionMap& amap, int frames) {
  TileBits out;
  for (int a = 0; a < kAttentionLevels; ++a) {
    Require(ratios[a] >= 0.0 && ratios[a] <= 1.0,
            "resolution ratio must lie in [0, 1]");
    out.per_tile[a] = profile.thresholds[a] * ratios[a];
    out.per_level[a] = amap.counts[a] * out.per_tile[a] * frames;
    out.gop += out.per_level[a];
  }
  return out;
}

double DownloadLatency(double gop_bits, double compression_ratio, double rate,
                       double rate_bias) {
  const double effective = rate - rate_bias;
  if (effective <= 0.0) {
    Fail(ErrorCode::kInfeasibleLink,
         "infeasible link: effective rate " + std::to_string(effective));
  }
  return gop_bits / (compression_ratio * effective);
}

double RenderLatency(const std::array<double, kAttentionLevels>& level_bits,
                     const SystemConfig& cfg, double frequency,
                     double freq_bias) {
  const double effective = frequency - freq_bias;
  if (effective <= 0.0) {
    Fail(ErrorCode::kInfeasibleCompute,
         "infeasible compute: effective frequency " + std::to_string(effective));
  }
  double cycles = 0.0;
  for (int a = 0; a < kAttentionLevels; ++a) {
    cycles += level_bits[a] * cfg.cycles_per_bit[a];
  }
  return cycles / (cfg.render_scale * effective);
}

double Qoe(double latency, const SystemConfig& cfg, const UserProfile& profile,
           const AttentionMap& amap,
           const std::array<double, kAttentionLevels>& resolution) {
  Require(latency >= 0, "latency must be non-negative");
  const double n = cfg.num_tiles();
  double quality = 0.0;
  for (int a = 0; a < kAttentionLevels; ++a) {
    quality += (a + 1) * amap.counts[a] / n *
               std::log1p(resolution[a] / profile.thresholds[a]);
  }
  return (1.0 - latency / cfg.latency_threshold) * quality;
}

double Hfqoe(std::span<const double> avg_qoe) {
  Require(!avg_qoe.empty(), "hfqoe needs at least one user");
  const double k = static_cast<double>(avg_qoe.size());
  const double mean = std::accumulate(avg_qoe.begin(), avg_qoe.end(), 0.0) / k;
  double var = 0.0;
  for (double q : avg_qoe) var += (q - mean) * (q - mean);
  var /= k;
  return 1.0 - std::sqrt(var) / std::sqrt(k);
}

double Reward(std::span<const double> qoe, double hfqoe,
              const SystemConfig& cfg) {
  const int users = static_cast<int>(qoe.size());
  double total = 0.0;
  double qoe_penalty = 0.0;
  for (double q : qoe) {
    total += q;
    if (q < cfg.qoe_threshold) qoe_penalty += cfg.qoe_threshold;
  }
  const double hf_penalty =
      hfqoe < cfg.hfqoe_threshold ? cfg.hfqoe_threshold : 0.0;
  return total - cfg.penalty_qoe * qoe_penalty -
         cfg.hfqoe_penalty_coef(users) * hf_penalty;
}

Allocation DecodeAction(std::span<const double> action, int active_users,
                        const SystemConfig& cfg,
                        std::span<const UserProfile> profiles) {
  Require(active_users >= 1, "at least one active user is required");
  Require(active_users <= cfg.max_users, "active users exceed max_users (" +
                                             std::to_string(active_users) + " > " +
                                             std::to_string(cfg.max_users) + ")");
  Require(static_cast<int>(action.size()) == ActionDim(cfg.max_users),
          "action length must be " + std::to_string(ActionDim(cfg.max_users)));
  Require(static_cast<int>(profiles.size()) >= active_users,
          "one profile per active user is required");
  for (double v : action) {
    Require(v >= 0.0 && v <= 1.0, "action entries must lie in [0, 1]");
  }

  Allocation out;
  out.resolution.resize(active_users);
  out.bandwidth.resize(active_users);
  out.frequency.resize(active_users);
  double bw_sum = 0.0;
  double freq_sum = 0.0;
  for (int k = 0; k < active_users; ++k) {
    bw_sum += action[k * kActionPerUser + 3];
    freq_sum += action[k * kActionPerUser + 4];
  }
  for (int k = 0; k < active_users; ++k) {
    const double* slot = action.data() + k * kActionPerUser;
    for (int a = 0; a < kAttentionLevels; ++a) {
      out.resolution[k][a] = profiles[k].thresholds[a] * slot[a];
    }
    out.bandwidth[k] = bw_sum > 0.0 ? cfg.total_bandwidth * slot[3] / bw_sum
                                    : cfg.total_bandwidth / active_users;
    out.frequency[k] = freq_sum > 0.0
                           ? cfg.total_frequency * slot[4] / freq_sum
                           : cfg.total_frequency / active_users;
  }
  return out;
}

}  // namespace mecdt
