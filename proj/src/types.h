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

#ifndef MECDT_TYPES_H_
#define MECDT_TYPES_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace mecdt {

inline constexpr int kAttentionLevels = 3;
// Per-user action slots: r_1, r_2, r_3, bandwidth share, frequency share.
inline constexpr int kActionPerUser = 5;
// Per-user state slots: two (N_1, N_2, N_3, QoE) snapshots plus T_d, T_r, T.
inline constexpr int kStatePerUser = 11;

enum class UserLevel { kStandard = 0, kAdvanced = 1, kPremium = 2 };

double LevelCode(UserLevel level);
char LevelLetter(UserLevel level);
UserLevel LevelFromLetter(char c);
std::string_view LevelName(UserLevel level);

// Tiles per attention level; index 0 is peripheral (a=1), index 2 central
// (a=3).
struct AttentionMap {
  std::array<int, kAttentionLevels> counts{};

  int Total() const { return counts[0] + counts[1] + counts[2]; }
  bool operator==(const AttentionMap&) const = default;
};

struct UserProfile {
  UserLevel level = UserLevel::kStandard;
  // Minimum per-tile resolution in bits for a = 1, 2, 3.
  std::array<double, kAttentionLevels> thresholds{};

  double code() const { return LevelCode(level); }
};

struct ChannelState {
  double gain = 1.0;          // Rayleigh power gain, unit mean
  double distance = 1.0;      // m
  double interference = 0.0;  // W
};

// Flattened allocation ratios, kActionPerUser entries per user slot.
using Action = std::vector<double>;
using StateVec = std::vector<double>;

inline int StateDim(int max_users) {
  return kStatePerUser * max_users + 2 + max_users;
}
inline int RawStateDim(int max_users) {
  return kStatePerUser * max_users + 2;
}
inline int ActionDim(int max_users) { return kActionPerUser * max_users; }

}  // namespace mecdt

#endif  // MECDT_TYPES_H_
