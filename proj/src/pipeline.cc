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

#include "pipeline.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "container.h"
#include "status.h"

#ifndef MECDT_VERSION
#define MECDT_VERSION "0.0.0"
#endif

namespace mecdt {
namespace {

constexpr uint64_t kSplitTag = 0x73706c6974;
constexpr uint64_t kCollectTag = 0x636f6c6c;
constexpr uint64_t kTrainTag = 0x747261696e;
constexpr uint64_t kEvalTag = 0x6576616c;

void WriteText(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp);
    out << text;
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIntegrity, "malformed " + path.string() + ": " + e.what());
  }
}

nlohmann::json SpecJson(const EnvSpec& s) {
  std::vector<int> levels;
  for (UserLevel l : s.levels) levels.push_back(static_cast<int>(l));
  return {{"env_id", s.LevelId()}, {"levels", levels}, {"seed", s.seed}};
}

std::string ShardName(int e) { return "shard_" + std::to_string(e) + ".bin"; }

}  // namespace

const char* Version() { return MECDT_VERSION; }

EnvSplit RunEnvSplit(const RunConfig& cfg) {
  return MakeEnvSplit(cfg.data.user_counts, cfg.data.train_envs_per_count,
                      cfg.data.heldout_envs_per_count, DeriveSeed(cfg.seed, {kSplitTag}));
}

std::vector<Scenario> HeldoutScenarios(const RunConfig& cfg) {
  const EnvSplit split = RunEnvSplit(cfg);
  const auto per = AssignToServers(split.heldout, cfg.system.num_servers);
  std::vector<Scenario> out;
  for (int e = 0; e < static_cast<int>(per.size()); ++e) {
    if (!per[e].empty()) out.push_back({e, per[e]});
  }
  return out;
}

void WriteRunStamp(const RunConfig& cfg, const std::string& command,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  WriteText(out_dir / "config.ini", DumpRunConfig(cfg));
  const nlohmann::json run = {{"command", command},
                              {"seed", cfg.seed},
                              {"version", Version()}};
  WriteText(out_dir / "run.json", run.dump(2) + "\n");
}

nlohmann::json GenerateData(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  WriteRunStamp(cfg, "gen-data", out_dir);
  const EnvSplit split = RunEnvSplit(cfg);
  if (split.train.empty()) Fail(ErrorCode::kConfig, "no training environments");
  const auto per = AssignToServers(split.train, cfg.system.num_servers);

  nlohmann::json envs = {{"train", nlohmann::json::array()},
                         {"heldout", nlohmann::json::array()}};
  nlohmann::json manifest = {{"version", Version()},
                             {"seed", cfg.seed},
                             {"max_users", cfg.system.max_users},
                             {"train_env_count", split.train.size()},
                             {"heldout_env_count", split.heldout.size()},
                             {"shards", nlohmann::json::array()}};
  for (int e = 0; e < cfg.system.num_servers; ++e) {
    if (per[e].empty()) {
      Fail(ErrorCode::kConfig, "server " + std::to_string(e) +
                                   " receives no training environment; lower "
                                   "num_servers or add environments");
    }
    const DatasetShard shard =
        CollectDataset(cfg.system, e, per[e], cfg.data.mix, cfg.data.episodes_per_env,
                       DeriveSeed(cfg.seed, {kCollectTag, static_cast<uint64_t>(e)}),
                       cfg.data.threads);
    const auto path = out_dir / ShardName(e);
    SaveShard(shard, path);
    for (const auto& s : per[e]) {
      nlohmann::json j = SpecJson(s);
      j["mec_id"] = e;
      const auto it = shard.envs.find(s.LevelId());
      if (it != shard.envs.end() && !it->second.trajectories.empty()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double sum = 0.0;
        for (const Trajectory& t : it->second.trajectories) {
          lo = std::min(lo, t.ep_reward);
          hi = std::max(hi, t.ep_reward);
          sum += t.ep_reward;
        }
        const double n = static_cast<double>(it->second.trajectories.size());
        j["ep_reward"] = {{"min", lo}, {"mean", sum / n}, {"max", hi}};
      }
      envs["train"].push_back(j);
    }
    manifest["shards"].push_back({{"mec_id", e},
                                  {"file", ShardName(e)},
                                  {"sha256", FileSha256Hex(path)},
                                  {"envs", shard.envs.size()},
                                  {"trajectories", shard.TrajectoryCount()},
                                  {"samples", shard.SampleCount()}});
  }
  for (size_t i = 0; i < split.heldout.size(); ++i) {
    nlohmann::json j = SpecJson(split.heldout[i]);
    j["mec_id"] = static_cast<int>(i) % cfg.system.num_servers;
    envs["heldout"].push_back(j);
  }
  WriteText(out_dir / "envs.json", envs.dump(2) + "\n");
  WriteText(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

std::vector<DatasetShard> LoadDataDir(const std::filesystem::path& data_dir,
                                      const RunConfig& cfg) {
  const nlohmann::json manifest = ReadJson(data_dir / "manifest.json");
  std::vector<DatasetShard> shards;
  try {
    if (manifest.at("max_users").get<int>() != cfg.system.max_users) {
      Fail(ErrorCode::kIntegrity,
           "dataset max_users " + std::to_string(manifest.at("max_users").get<int>()) +
               " does not match config max_users " +
               std::to_string(cfg.system.max_users));
    }
    for (const auto& s : manifest.at("shards")) {
      const auto path = data_dir / s.at("file").get<std::string>();
      if (!std::filesystem::exists(path)) {
        Fail(ErrorCode::kIo, "missing shard " + path.string());
      }
      if (FileSha256Hex(path) != s.at("sha256").get<std::string>()) {
        Fail(ErrorCode::kIntegrity, "checksum mismatch for " + path.string());
      }
      shards.push_back(LoadShard(path));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIntegrity, std::string("malformed data manifest: ") + e.what());
  }
  if (static_cast<int>(shards.size()) != cfg.system.num_servers) {
    Fail(ErrorCode::kConfig, "data dir has " + std::to_string(shards.size()) +
                                 " shards but num_servers is " +
                                 std::to_string(cfg.system.num_servers));
  }
  return shards;
}

nlohmann::json TrainModel(const RunConfig& cfg, const std::filesystem::path& data_dir,
                          const std::filesystem::path& out_dir, bool resume) {
  const std::vector<DatasetShard> shards = LoadDataDir(data_dir, cfg);
  WriteRunStamp(cfg, "train", out_dir);
  TrainOptions opts;
  opts.out_dir = out_dir;
  opts.resume = resume;
  const TrainResult r = TrainFederated(cfg.fl, cfg.model, shards,
                                       DeriveSeed(cfg.seed, {kTrainTag}), opts);
  const auto final_path = out_dir / "final.bin";
  nlohmann::json manifest = {{"version", Version()},
                             {"seed", cfg.seed},
                             {"rounds", cfg.fl.rounds},
                             {"resumed_from_round", r.start_round},
                             {"data_digest", ShardsDigest(shards)},
                             {"final_checkpoint", "final.bin"},
                             {"final_sha256", FileSha256Hex(final_path)},
                             {"params_digest", ParamsDigest(r.params)}};
  WriteText(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

ModelParams LoadModelForConfig(const std::filesystem::path& checkpoint,
                               const RunConfig& cfg) {
  return LoadCheckpoint(checkpoint, &cfg.model).params;
}

nlohmann::json EvaluateModel(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                             const std::filesystem::path& out_dir) {
  auto params = std::make_shared<const ModelParams>(LoadModelForConfig(checkpoint, cfg));
  WriteRunStamp(cfg, "eval", out_dir);
  const std::vector<Scenario> scenarios = HeldoutScenarios(cfg);
  if (scenarios.empty()) Fail(ErrorCode::kConfig, "no held-out environments to evaluate");
  const SystemConfig sys = cfg.EvalSystem();

  nlohmann::json summary = {{"version", Version()},
                            {"seed", cfg.seed},
                            {"checkpoint_sha256", FileSha256Hex(checkpoint)},
                            {"episodes", cfg.eval.episodes},
                            {"rtg", cfg.eval.rtg},
                            {"t_te", cfg.eval.t_te},
                            {"methods", nlohmann::json::object()}};
  const SuiteResult model = EvaluateSuite(DtFactory(params), sys, scenarios,
                                          cfg.eval.episodes, cfg.eval.rtg,
                                          cfg.eval.threads);
  summary["methods"]["model"] = model.ToJson();
  summary["methods"]["model"]["use_prompt"] = params->config().use_prompt;
  std::ofstream csv(out_dir / "episodes.csv", std::ios::trunc);
  WriteEpisodeCsv(csv, model.episodes);
  if (cfg.eval.baselines) {
    const SuiteResult mix = EvaluateSuite(
        BehaviorMixFactory(cfg.data.mix, cfg.eval.episodes, DeriveSeed(cfg.seed, {kEvalTag})),
        sys, scenarios, cfg.eval.episodes, cfg.eval.rtg, cfg.eval.threads);
    summary["methods"]["behavior_mix"] = mix.ToJson();
    std::ofstream bcsv(out_dir / "episodes_behavior_mix.csv", std::ios::trunc);
    WriteEpisodeCsv(bcsv, mix.episodes);
  }
  WriteText(out_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

std::vector<SweepRow> SweepModel(const RunConfig& cfg,
                                 const std::filesystem::path& checkpoint,
                                 const std::string& axis_name, std::vector<double> grid,
                                 const std::filesystem::path& out_dir) {
  const SweepAxis axis = ParseSweepAxis(axis_name);
  const ModelParams params = LoadModelForConfig(checkpoint, cfg);
  WriteRunStamp(cfg, "sweep", out_dir);
  if (grid.empty()) grid = DefaultGrid(axis);
  const std::vector<Scenario> scenarios = HeldoutScenarios(cfg);
  if (scenarios.empty()) Fail(ErrorCode::kConfig, "no held-out environments to evaluate");
  const auto rows = Sweep(params, cfg.EvalSystem(), scenarios, axis, grid,
                          cfg.eval.episodes, cfg.eval.rtg, cfg.eval.threads);
  std::ostringstream csv;
  WriteSweepCsv(csv, axis, rows);
  WriteText(out_dir / ("sweep_" + SweepAxisName(axis) + ".csv"), csv.str());
  return rows;
}

}  // namespace mecdt
