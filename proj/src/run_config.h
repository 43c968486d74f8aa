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

#ifndef MECDT_RUN_CONFIG_H_
#define MECDT_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "behavior.h"
#include "fedavg.h"
#include "model.h"
#include "system_config.h"

namespace mecdt {

struct DataConfig {
  std::vector<int> user_counts{2, 3, 4, 5, 6, 7, 8};
  int train_envs_per_count = 10;
  int heldout_envs_per_count = 10;
  int episodes_per_env = 100;
  PolicyMix mix;
  int threads = 1;
};

struct EvalConfig {
  int episodes = 10;
  double rtg = 900.0;
  int t_te = 100;  // steps per evaluation episode
  bool baselines = true;  // also evaluate the behavior-policy mix
  int threads = 1;
};

// Everything a run needs, loaded from one INI file with sections [run],
// [system], [data], [fl], [model], [eval].
struct RunConfig {
  uint64_t seed = 0;
  SystemConfig system;
  std::vector<std::string> gaze_traces;  // CSV paths; empty = synthetic gaze
  DataConfig data;
  FlConfig fl;
  ModelConfig model;
  EvalConfig eval;

  // Derives dependent fields (client count, model dims) and validates.
  // Throws Error(kConfig).
  void Finalize();
  // System config used for evaluation rollouts (episode_len = t_te).
  SystemConfig EvalSystem() const;
  // Loads gaze_traces into system.gaze_library.
  void LoadGazeLibrary();
};

// Environment lookup used for overrides; returns nullopt when unset.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup ProcessEnv();

// Every key can be overridden by MECDT_<SECTION>_<KEY> (upper case), e.g.
// MECDT_FL_ROUNDS=5. Unknown sections or keys are errors. Relative gaze
// trace paths resolve against the config file's directory.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const EnvLookup& env = ProcessEnv());
RunConfig ParseRunConfig(const std::string& text, const EnvLookup& env = {});

// Fully resolved INI text; parsing it yields an identical config.
std::string DumpRunConfig(const RunConfig& cfg);

// Single-key access by "section.key". Throws Error(kConfig) for unknown keys
// or unparsable values; no cross-field validation.
void SetRunConfigValue(RunConfig& cfg, const std::string& key, const std::string& value);
std::string GetRunConfigValue(const RunConfig& cfg, const std::string& key);

// Names of all keys as "section.key".
std::vector<std::string> RunConfigKeys();

}  // namespace mecdt

#endif  // MECDT_RUN_CONFIG_H_
