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

#ifndef MECDT_SYSTEM_CONFIG_H_
#define MECDT_SYSTEM_CONFIG_H_

#include <array>
#include <memory>
#include <vector>

#include "types.h"

namespace mecdt {

struct GazeTrace;

// Physical constants of one MEC server and its users. Defaults are the
// shipped simulation settings; see configs/default.ini for the key names.
struct SystemConfig {
  int num_servers = 5;
  int max_users = 8;
  int grid_rows = 4;
  int grid_cols = 4;
  int frames_per_gop = 16;
  double latency_threshold = 0.05;    // s
  double total_bandwidth = 10e6;      // Hz
  double total_frequency = 15e9;      // Hz
  std::array<double, kAttentionLevels> cycles_per_bit{800.0, 900.0, 1000.0};
  double transmit_power = 1.0;        // W
  double path_loss_exponent = 4.0;
  // -174 dBm/Hz. When noise_is_psd is false this is a flat power in W.
  double noise_psd = 3.981071705534973e-21;
  bool noise_is_psd = true;
  double compression_ratio = 300.0;
  double interference = 0.0;          // W
  double rate_bias_frac = 0.0;
  double freq_bias_frac = 0.0;
  double render_scale = 300.0;
  double qoe_threshold = 0.91;
  double hfqoe_threshold = 0.8;
  double penalty_qoe = 1.0;
  // Effective hfQoE penalty is penalty_hfqoe * K_e when per-user scaling is on
  // (keeps the 1 : K_e ratio with the QoE penalty).
  double penalty_hfqoe = 1.0;
  bool penalty_hfqoe_per_user = true;
  // [level][a-1] resolution thresholds in bits per tile.
  std::array<std::array<double, kAttentionLevels>, 3> level_thresholds{{
      {460800.0 / 2.0, 460800.0 / 1.5, 1382400.0 / 2.0},      // standard
      {460800.0 / 1.5, 1382400.0 / 2.0, 3110400.0 / 2.0},     // advanced
      {1382400.0 / 2.0, 3110400.0 / 2.0, 12441600.0 / 4.0},   // premium
  }};
  double user_x_min = 10.0;
  double user_x_max = 20.0;
  double user_y_min = 0.0;
  double user_y_max = 5.0;
  int episode_len = 100;
  double gaze_step_sigma = 0.05;
  // Ingested head-movement traces; synthetic walks are used when unset.
  std::shared_ptr<const std::vector<GazeTrace>> gaze_library;

  int num_tiles() const { return grid_rows * grid_cols; }
  double noise_power(double bandwidth) const {
    return noise_is_psd ? noise_psd * bandwidth : noise_psd;
  }
  double hfqoe_penalty_coef(int active_users) const {
    return penalty_hfqoe_per_user ? penalty_hfqoe * active_users
                                  : penalty_hfqoe;
  }
  UserProfile Profile(UserLevel level) const;

  // Throws Error(kConfig) on the first violated invariant.
  void Validate() const;
};

}  // namespace mecdt

#endif  // MECDT_SYSTEM_CONFIG_H_
