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

#include "fedavg.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <regex>

#include "container.h"
#include "parallel.h"
#include "status.h"

namespace mecdt {
namespace {

struct UsableEnv {
  const EnvDataset* env = nullptr;
  const Trajectory* top = nullptr;
  std::vector<const Trajectory*> windows;  // trajectories long enough
};

std::vector<UsableEnv> UsableEnvs(const DatasetShard& shard, const ModelConfig& m) {
  std::vector<UsableEnv> out;
  for (const auto& [id, env] : shard.envs) {
    if (env.trajectories.empty()) continue;
    UsableEnv u;
    u.env = &env;
    u.top = &Top1(env.trajectories);
    for (const auto& t : env.trajectories) {
      if (t.length() >= m.context_len) u.windows.push_back(&t);
    }
    if (u.top->length() < m.prompt_len || u.windows.empty()) {
      std::cerr << "warning: client " << shard.mec_id << " skips env " << id
                << ": trajectories shorter than the prompt/context length\n";
      continue;
    }
    out.push_back(std::move(u));
  }
  if (out.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "client " + std::to_string(shard.mec_id) + " has no usable environment");
  }
  return out;
}

int UniformIndex(Rng& rng, size_t n) {
  return static_cast<int>(std::uniform_int_distribution<size_t>(0, n - 1)(rng));
}

std::filesystem::path CheckpointPath(const std::filesystem::path& dir, int round) {
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_r%04d.bin", round);
  return dir / name;
}

// Newest "ckpt_rNNNN.bin" in dir, or -1.
int LatestCheckpointRound(const std::filesystem::path& dir) {
  int best = -1;
  if (!std::filesystem::exists(dir)) return best;
  const std::regex re("ckpt_r([0-9]{4,})\\.bin");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, re)) best = std::max(best, std::stoi(m[1]));
  }
  return best;
}

nlohmann::json OptimizerRecord(const FlConfig& fl, int next_round) {
  return {{"kind", "adamw"},
          {"lr", fl.lr},
          {"beta1", fl.adam_beta1},
          {"beta2", fl.adam_beta2},
          {"eps", fl.adam_eps},
          {"weight_decay", fl.weight_decay},
          {"grad_clip", fl.grad_clip},
          {"lr_decay", fl.lr_decay},
          {"warmup", fl.warmup},
          {"moments", "reset at every round start"},
          {"next_round", next_round},
          {"next_lr", LrAt(fl, next_round, fl.warmup)}};
}

}  // namespace

void FlConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorCode::kConfig, "invalid fl config: " + what);
  };
  check(clients >= 1, "clients must be >= 1");
  check(rounds >= 0, "rounds must be >= 0");
  check(local_epochs >= 1 && local_iters >= 0, "local steps must be >= 0");
  check(batch >= 1, "batch must be >= 1");
  check(lr > 0 && weight_decay >= 0, "lr must be > 0, weight_decay >= 0");
  check(lr_decay >= 0 && lr_decay < 1, "lr_decay must be in [0, 1)");
  check(warmup >= 0, "warmup must be >= 0");
  check(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1,
        "adam betas must be in [0, 1)");
  check(adam_eps > 0, "adam_eps must be > 0");
  check(checkpoint_every >= 1, "checkpoint_every must be >= 1");
  check(threads >= 1, "threads must be >= 1");
}

nlohmann::json FlConfig::ToJson() const {
  return {{"clients", clients},     {"rounds", rounds},
          {"local_epochs", local_epochs}, {"local_iters", local_iters},
          {"batch", batch},         {"lr", lr},
          {"weight_decay", weight_decay}, {"lr_decay", lr_decay},
          {"warmup", warmup},       {"grad_clip", grad_clip},
          {"adam_beta1", adam_beta1}, {"adam_beta2", adam_beta2},
          {"adam_eps", adam_eps},
          {"checkpoint_every", checkpoint_every}};
}

double LrAt(const FlConfig& fl, int round, int step) {
  Require(round >= 0 && step >= 0, "lr schedule indices must be >= 0");
  double lr = fl.lr * std::pow(1.0 - fl.lr_decay, round);
  if (step < fl.warmup) lr *= static_cast<double>(step + 1) / fl.warmup;
  return lr;
}

LocalResult LocalTraining(const ModelParams& global, const DatasetShard& shard,
                          const FlConfig& fl, int round, uint64_t seed) {
  LocalResult out;
  out.params = global;
  if (fl.local_steps() == 0) return out;
  const ModelConfig& m = global.config();
  Require(shard.max_users == m.max_users(),
          "shard max_users " + std::to_string(shard.max_users) +
              " does not match the model's " + std::to_string(m.max_users()));
  const std::vector<UsableEnv> envs = UsableEnvs(shard, m);

  Rng rng(seed);
  AdamWConfig acfg;
  acfg.beta1 = fl.adam_beta1;
  acfg.beta2 = fl.adam_beta2;
  acfg.eps = fl.adam_eps;
  acfg.weight_decay = fl.weight_decay;
  acfg.grad_clip = fl.grad_clip;
  AdamW opt(global.size(), acfg);
  double loss_sum = 0.0;
  for (int step = 0; step < fl.local_steps(); ++step) {
    const UsableEnv& u = envs[UniformIndex(rng, envs.size())];
    const auto& levels = u.env->spec.levels;
    const Prompt prompt =
        SampleTrainingPrompt(*u.top, levels, m.max_users(), m.prompt_len, rng);
    std::vector<Sample> batch(fl.batch);
    for (Sample& s : batch) {
      const Trajectory& t = *u.windows[UniformIndex(rng, u.windows.size())];
      const int start = std::uniform_int_distribution<int>(
          0, t.length() - m.context_len)(rng);
      s.prompt = prompt;
      s.context = TrajectoryWindow(t, levels, m.max_users(), start, m.context_len);
      s.mask.assign(prompt.size() + s.context.size(), 1.0);
    }
    LossAndGrad lg = LossGrad(out.params, batch, ForwardOptions{true, &rng});
    opt.Step(out.params.values(), lg.grad, LrAt(fl, round, step));
    loss_sum += lg.loss;
  }
  out.steps = fl.local_steps();
  out.mean_loss = loss_sum / out.steps;
  if (!out.params.AllFinite()) {
    Fail(ErrorCode::kInvalidArgument,
         "client " + std::to_string(shard.mec_id) + " diverged (non-finite params)");
  }
  return out;
}

ModelParams Aggregate(std::span<const ModelParams> locals,
                      std::span<const double> weights) {
  Require(!locals.empty(), "aggregate needs at least one client");
  Require(locals.size() == weights.size(), "one weight per client required");
  double total = 0.0;
  for (double w : weights) {
    Require(w >= 0.0, "aggregation weights must be >= 0");
    total += w;
  }
  Require(std::fabs(total - 1.0) <= 1e-12, "aggregation weights must sum to 1");
  ModelParams out(locals[0].config());
  for (const auto& p : locals) {
    Require(p.config() == out.config() && p.size() == out.size(),
            "aggregate: parameter shape mismatch");
  }
  auto& v = out.values();
  for (size_t i = 0; i < v.size(); ++i) {
    double acc = 0.0;
    for (size_t e = 0; e < locals.size(); ++e) acc += weights[e] * locals[e].values()[i];
    v[i] = acc;
  }
  return out;
}

std::vector<double> ClientWeights(std::span<const DatasetShard> shards) {
  double n = 0.0;
  for (const auto& s : shards) n += static_cast<double>(s.SampleCount());
  Require(n > 0, "shards contain no samples");
  std::vector<double> w;
  for (const auto& s : shards) w.push_back(static_cast<double>(s.SampleCount()) / n);
  return w;
}

nlohmann::json RoundLog::ToJson() const {
  return {{"round", round},
          {"per_client_loss", client_loss},
          {"global_loss", global_loss},
          {"lr", lr},
          {"wall_time", wall_time}};
}

std::string ShardsDigest(std::span<const DatasetShard> shards) {
  std::string all;
  for (const auto& s : shards) all += ShardDigest(s);
  return Sha256Hex(all.data(), all.size());
}

TrainResult TrainFederated(const FlConfig& fl, const ModelConfig& model,
                           std::span<const DatasetShard> shards, uint64_t seed,
                           const TrainOptions& opts) {
  fl.Validate();
  model.Validate();
  Require(static_cast<int>(shards.size()) == fl.clients,
          "expected " + std::to_string(fl.clients) + " shards, got " +
              std::to_string(shards.size()));
  const std::vector<double> weights = ClientWeights(shards);
  const std::string digest = ShardsDigest(shards);
  const nlohmann::json extra = {{"seed", seed},
                                {"data_digest", digest},
                                {"fl", fl.ToJson()}};

  TrainResult result;
  result.params = ModelParams::Init(model, DeriveSeed(seed, {0x696e6974}));
  std::vector<nlohmann::json> log_lines;
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    const int latest = opts.resume ? LatestCheckpointRound(*opts.out_dir) : -1;
    if (latest >= 0) {
      Checkpoint ck = LoadCheckpoint(CheckpointPath(*opts.out_dir, latest), &model);
      if (!(ck.params.config() == model)) {
        Fail(ErrorCode::kIntegrity, "resume checkpoint has a different model config");
      }
      if (ck.extra.value("seed", uint64_t{0}) != seed ||
          ck.extra.value("data_digest", std::string()) != digest) {
        Fail(ErrorCode::kIntegrity,
             "resume checkpoint was trained with a different seed or dataset");
      }
      result.params = std::move(ck.params);
      result.start_round = ck.round;
      std::ifstream in(*opts.out_dir / "rounds.jsonl");
      for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.at("round").get<int>() < result.start_round) log_lines.push_back(j);
      }
    }
  }

  auto save = [&](int completed) {
    if (!opts.out_dir) return;
    Checkpoint ck{result.params, completed, OptimizerRecord(fl, completed), extra};
    SaveCheckpoint(ck, CheckpointPath(*opts.out_dir, completed));
    if (completed == fl.rounds) SaveCheckpoint(ck, *opts.out_dir / "final.bin");
  };
  auto write_log = [&] {
    if (!opts.out_dir) return;
    const auto path = *opts.out_dir / "rounds.jsonl";
    std::ofstream out(path.string() + ".tmp", std::ios::trunc);
    for (const auto& j : log_lines) out << j.dump() << "\n";
    out.close();
    std::filesystem::rename(path.string() + ".tmp", path);
  };
  if (result.start_round == 0) save(0);

  for (int round = result.start_round; round < fl.rounds; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<LocalResult> locals(shards.size());
    ParallelFor(static_cast<int>(shards.size()), fl.threads, [&](int e) {
      locals[e] = LocalTraining(result.params, shards[e], fl, round,
                                DeriveSeed(seed, {static_cast<uint64_t>(round),
                                                  static_cast<uint64_t>(e)}));
    });
    std::vector<ModelParams> params;
    RoundLog rl;
    rl.round = round;
    rl.lr = LrAt(fl, round, fl.warmup);
    for (size_t e = 0; e < locals.size(); ++e) {
      params.push_back(std::move(locals[e].params));
      rl.client_loss.push_back(locals[e].mean_loss);
      rl.global_loss += weights[e] * locals[e].mean_loss;
    }
    result.params = Aggregate(params, weights);
    rl.wall_time = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(rl);
    log_lines.push_back(rl.ToJson());
    if ((round + 1) % fl.checkpoint_every == 0 || round + 1 == fl.rounds) {
      save(round + 1);
    }
    write_log();
    if (opts.on_round) opts.on_round(rl);
  }
  if (fl.rounds == 0 || result.start_round == fl.rounds) save(fl.rounds);
  return result;
}

}  // namespace mecdt
