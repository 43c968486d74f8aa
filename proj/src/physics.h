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

#ifndef MECDT_PHYSICS_H_
#define MECDT_PHYSICS_H_

#include <array>
#include <span>
#include <vector>

#include "system_config.h"
#include "types.h"

namespace mecdt {

struct TileBits {
  std::array<double, kAttentionLevels> per_tile{};  // b_a
  std::array<double, kAttentionLevels> per_level{};  // g_a = N_a * b_a * F
  double gop = 0.0;                                   // G
};

// Physical allocation for the active users of one server.
struct Allocation {
  std::vector<std::array<double, kAttentionLevels>> resolution;  // b_{k,a}
  std::vector<double> bandwidth;                                 // Hz
  std::vector<double> frequency;                                 // Hz
};

// Shannon rate over B_k Hz. Zero bandwidth gives zero rate.
double TransmissionRate(const SystemConfig& cfg, double bandwidth,
                        const ChannelState& ch);

TileBits ComputeTileBits(const UserProfile& profile,
                         const std::array<double, kAttentionLevels>& ratios,
                         const AttentionMap& amap, int frames);

// Throws Error(kInfeasibleLink) when rate - rate_bias <= 0.
double DownloadLatency(double gop_bits, double compression_ratio, double rate,
                       double rate_bias);

// Throws Error(kInfeasibleCompute) when frequency - freq_bias <= 0.
double RenderLatency(const std::array<double, kAttentionLevels>& level_bits,
                     const SystemConfig& cfg, double frequency,
                     double freq_bias);

inline double TotalLatency(double download, double render) {
  return download + render;
}

double Qoe(double latency, const SystemConfig& cfg, const UserProfile& profile,
           const AttentionMap& amap,
           const std::array<double, kAttentionLevels>& resolution);

// 1 - population_std(avg_qoe) / sqrt(K_e).
double Hfqoe(std::span<const double> avg_qoe);

double Reward(std::span<const double> qoe, double hfqoe,
              const SystemConfig& cfg);

// Maps sigmoid-range ratios onto resolutions, bandwidth and frequency. Shares
// are normalized over the active users; an all-zero share vector falls back
// to a uniform split.
Allocation DecodeAction(std::span<const double> action, int active_users,
                        const SystemConfig& cfg,
                        std::span<const UserProfile> profiles);

}  // namespace mecdt

#endif  // MECDT_PHYSICS_H_
