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

#include "system_config.h"

#include <string>

#include "status.h"

namespace mecdt {

double LevelCode(UserLevel level) {
  switch (level) {
    case UserLevel::kPremium: return 0.6;
    case UserLevel::kAdvanced: return 0.4;
    case UserLevel::kStandard: return 0.2;
  }
  return 0.0;
}

char LevelLetter(UserLevel level) {
  switch (level) {
    case UserLevel::kPremium: return 'P';
    case UserLevel::kAdvanced: return 'A';
    case UserLevel::kStandard: return 'S';
  }
  return '?';
}

UserLevel LevelFromLetter(char c) {
  switch (c) {
    case 'P': case 'p': return UserLevel::kPremium;
    case 'A': case 'a': return UserLevel::kAdvanced;
    case 'S': case 's': return UserLevel::kStandard;
  }
  Fail(ErrorCode::kInvalidArgument,
       std::string("unknown user level letter '") + c + "'");
}

std::string_view LevelName(UserLevel level) {
  switch (level) {
    case UserLevel::kPremium: return "premium";
    case UserLevel::kAdvanced: return "advanced";
    case UserLevel::kStandard: return "standard";
  }
  return "unknown";
}

UserProfile SystemConfig::Profile(UserLevel level) const {
  UserProfile p;
  p.level = level;
  p.thresholds = level_thresholds[static_cast<int>(level)];
  return p;
}

namespace {

void Check(bool cond, const char* what) {
  if (!cond) Fail(ErrorCode::kConfig, std::string("invalid system config: ") + what);
}

}  // namespace

void SystemConfig::Validate() const {
  Check(num_servers >= 1, "num_servers must be >= 1");
  Check(max_users >= 1, "max_users must be >= 1");
  Check(grid_rows >= 1 && grid_cols >= 1, "grid must be non-empty");
  Check(frames_per_gop >= 1, "frames_per_gop must be >= 1");
  Check(latency_threshold > 0, "latency_threshold must be > 0");
  Check(total_bandwidth > 0, "total_bandwidth must be > 0");
  Check(total_frequency > 0, "total_frequency must be > 0");
  Check(cycles_per_bit[0] > 0 && cycles_per_bit[0] <= cycles_per_bit[1] &&
            cycles_per_bit[1] <= cycles_per_bit[2],
        "cycles_per_bit must be positive and non-decreasing");
  Check(transmit_power > 0, "transmit_power must be > 0");
  Check(noise_psd > 0, "noise must be > 0");
  Check(compression_ratio >= 1, "compression_ratio must be >= 1");
  Check(interference >= 0, "interference must be >= 0");
  Check(rate_bias_frac >= 0 && rate_bias_frac < 1,
        "rate_bias_frac must be in [0, 1)");
  Check(freq_bias_frac >= 0 && freq_bias_frac < 1,
        "freq_bias_frac must be in [0, 1)");
  Check(render_scale > 0, "render_scale must be > 0");
  Check(qoe_threshold > 0 && hfqoe_threshold > 0, "thresholds must be > 0");
  Check(penalty_qoe >= 0 && penalty_hfqoe >= 0, "penalties must be >= 0");
  for (const auto& lv : level_thresholds) {
    Check(lv[0] > 0 && lv[0] < lv[1] && lv[1] < lv[2],
          "level thresholds must be positive and strictly increasing");
  }
  Check(user_x_min <= user_x_max && user_y_min <= user_y_max,
        "user box ranges must be ordered");
  Check(user_x_min > 0 || user_y_min > 0,
        "user box must exclude the base station position");
  Check(episode_len >= 1, "episode_len must be >= 1");
  Check(gaze_step_sigma >= 0, "gaze_step_sigma must be >= 0");
}

}  // namespace mecdt
