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

#ifndef MECDT_PIPELINE_H_
#define MECDT_PIPELINE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "evalharness.h"
#include "json.hpp"
#include "run_config.h"
#include "scenarios.h"

namespace mecdt {

const char* Version();

// Train / held-out environments of a run; a pure function of the config.
EnvSplit RunEnvSplit(const RunConfig& cfg);
// Held-out envs grouped by server for evaluation.
std::vector<Scenario> HeldoutScenarios(const RunConfig& cfg);

// Writes one shard per server ("shard_<e>.bin"), "envs.json" and
// "manifest.json" (file checksums, env and sample counts).
nlohmann::json GenerateData(const RunConfig& cfg, const std::filesystem::path& out_dir);

// Verifies the manifest checksums (Error(kIntegrity) on mismatch) and loads
// the shards. Missing files are Error(kIo).
std::vector<DatasetShard> LoadDataDir(const std::filesystem::path& data_dir,
                                      const RunConfig& cfg);

// Federated training; writes checkpoints, "rounds.jsonl", and
// "manifest.json" with the final checkpoint checksum.
nlohmann::json TrainModel(const RunConfig& cfg, const std::filesystem::path& data_dir,
                          const std::filesystem::path& out_dir, bool resume);

// Loads a checkpoint whose dimensions must match the config (Error(kIntegrity)
// naming both dimension sets otherwise).
ModelParams LoadModelForConfig(const std::filesystem::path& checkpoint,
                               const RunConfig& cfg);

// Evaluates the checkpoint (and the behavior mix when eval.baselines) on the
// held-out envs; writes "summary.json" and "episodes.csv".
nlohmann::json EvaluateModel(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                             const std::filesystem::path& out_dir);

// Writes "sweep_<axis>.csv"; an empty grid uses the default grid.
std::vector<SweepRow> SweepModel(const RunConfig& cfg,
                                 const std::filesystem::path& checkpoint,
                                 const std::string& axis, std::vector<double> grid,
                                 const std::filesystem::path& out_dir);

// Run-directory stamp: resolved config snapshot and run.json (seed, version).
void WriteRunStamp(const RunConfig& cfg, const std::string& command,
                   const std::filesystem::path& out_dir);

}  // namespace mecdt

#endif  // MECDT_PIPELINE_H_
