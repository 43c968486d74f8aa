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

#ifndef MECDT_FEDAVG_H_
#define MECDT_FEDAVG_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "model.h"
#include "optimizer.h"
#include "trajectory.h"

namespace mecdt {

struct FlConfig {
  int clients = 5;
  int rounds = 100;
  int local_epochs = 1;
  int local_iters = 10;  // per epoch
  int batch = 16;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double lr_decay = 0.01;  // lr *= (1 - lr_decay) every round
  int warmup = 3;          // linear warm-up steps at the start of each round
  double grad_clip = 0.25;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  double adam_eps = 1e-8;
  int checkpoint_every = 10;
  int threads = 1;  // client-level parallelism

  int local_steps() const { return local_epochs * local_iters; }
  void Validate() const;  // throws Error(kConfig)
  nlohmann::json ToJson() const;
};

// lr * (1 - lr_decay)^round, times (step + 1) / warmup for step < warmup.
double LrAt(const FlConfig& fl, int round, int step);

struct LocalResult {
  ModelParams params;
  double mean_loss = 0.0;
  int steps = 0;
};

// Local training on one client's shard (optimizer state starts fresh). Each
// iteration samples an environment, a top-1 prompt segment, and a batch of
// context windows, then takes one AdamW step.
LocalResult LocalTraining(const ModelParams& global, const DatasetShard& shard,
                          const FlConfig& fl, int round, uint64_t seed);

// Elementwise sum_e weights[e] * locals[e]. Weights must sum to 1.
ModelParams Aggregate(std::span<const ModelParams> locals,
                      std::span<const double> weights);

// Sample-count weights n_e / n.
std::vector<double> ClientWeights(std::span<const DatasetShard> shards);

struct RoundLog {
  int round = 0;
  std::vector<double> client_loss;
  double global_loss = 0.0;  // n_e-weighted mean of client losses
  double lr = 0.0;
  double wall_time = 0.0;  // seconds spent in the round
  nlohmann::json ToJson() const;
};

struct TrainOptions {
  // When set, checkpoints ("ckpt_rNNNN.bin", "final.bin") and "rounds.jsonl"
  // are written here.
  std::optional<std::filesystem::path> out_dir;
  // Continue from the newest checkpoint in out_dir if one exists.
  bool resume = false;
  std::function<void(const RoundLog&)> on_round;
};

struct TrainResult {
  ModelParams params;
  std::vector<RoundLog> log;  // rounds run in this call
  int start_round = 0;
};

// Deterministic per (fl, model config, shards, seed). Client e trains with
// seed DeriveSeed(seed, {round, e}).
TrainResult TrainFederated(const FlConfig& fl, const ModelConfig& model,
                           std::span<const DatasetShard> shards, uint64_t seed,
                           const TrainOptions& opts = {});

// Identity of the training data, stored in checkpoints to guard resumes.
std::string ShardsDigest(std::span<const DatasetShard> shards);

}  // namespace mecdt

#endif  // MECDT_FEDAVG_H_
