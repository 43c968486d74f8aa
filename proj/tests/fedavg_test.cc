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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "behavior.h"
#include "doctest.h"
#include "optimizer.h"
#include "status.h"

namespace mecdt {
namespace {

ModelConfig TinyModel() {
  ModelConfig m = ModelConfigForUsers(2);
  m.embed_dim = 16;
  m.layers = 2;
  m.dropout = 0.0;
  return m;
}

std::vector<DatasetShard> TinyShards() {
  SystemConfig cfg;
  cfg.max_users = 2;
  cfg.episode_len = 20;
  const std::vector<EnvSpec> a = {{{UserLevel::kPremium, UserLevel::kStandard}, 1}};
  const std::vector<EnvSpec> b = {{{UserLevel::kAdvanced}, 2},
                                  {{UserLevel::kStandard, UserLevel::kStandard}, 3}};
  PolicyMix mix;
  mix.hillclimb_iters = 8;
  return {CollectDataset(cfg, 0, a, mix, 4, 11), CollectDataset(cfg, 1, b, mix, 4, 12)};
}

FlConfig TinyFl(int rounds) {
  FlConfig fl;
  fl.clients = 2;
  fl.rounds = rounds;
  fl.local_iters = 3;
  fl.batch = 4;
  fl.lr = 1e-3;
  return fl;
}

std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mecdt_fedavg_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

ModelParams RandomParams(uint64_t seed) {
  ModelParams p(TinyModel());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  for (double& v : p.values()) v = n(rng);
  return p;
}

TEST_CASE("learning-rate schedule") {
  FlConfig fl;
  CHECK(LrAt(fl, 0, 0) == doctest::Approx(fl.lr / 3).epsilon(1e-15));
  CHECK(LrAt(fl, 0, 1) == doctest::Approx(2 * fl.lr / 3).epsilon(1e-15));
  CHECK(LrAt(fl, 0, 2) == doctest::Approx(fl.lr).epsilon(1e-15));
  CHECK(LrAt(fl, 10, 5) == doctest::Approx(fl.lr * std::pow(0.99, 10)).epsilon(1e-14));
  CHECK(LrAt(fl, 3, 0) == doctest::Approx(fl.lr * std::pow(0.99, 3) / 3).epsilon(1e-14));
}

TEST_CASE("adamw step matches a hand computation") {
  AdamWConfig cfg;
  cfg.grad_clip = 0;
  AdamW opt(2, cfg);
  std::vector<double> p = {1.0, -2.0};
  std::vector<double> g = {0.5, -0.1};
  opt.Step(p, g, 0.01);
  // After one step the bias-corrected update is g / (|g| + eps).
  CHECK(p[0] == doctest::Approx(1.0 - 0.01 * (0.5 / (0.5 + 1e-8) + 1e-4 * 1.0)).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(-2.0 - 0.01 * (-0.1 / (0.1 + 1e-8) - 1e-4 * 2.0)).epsilon(1e-14));

  std::vector<double> big = {3.0, 4.0};
  CHECK(ClipGradNorm(big, 0.25) == doctest::Approx(5.0));
  CHECK(std::hypot(big[0], big[1]) == doctest::Approx(0.25));
  std::vector<double> small = {0.1, 0.0};
  ClipGradNorm(small, 0.25);
  CHECK(small[0] == 0.1);
}

TEST_CASE("aggregation is the weighted elementwise mean") {
  const std::vector<ModelParams> ps = {RandomParams(1), RandomParams(2), RandomParams(3)};
  const std::vector<double> w = {0.5, 0.3, 0.2};
  const ModelParams avg = Aggregate(ps, w);
  double worst = 0;
  for (size_t i = 0; i < avg.size(); ++i) {
    const double want =
        0.5 * ps[0].values()[i] + 0.3 * ps[1].values()[i] + 0.2 * ps[2].values()[i];
    worst = std::max(worst, std::fabs(avg.values()[i] - want));
  }
  CHECK(worst <= 1e-12);

  const std::vector<ModelParams> same(3, ps[0]);
  const ModelParams fixed = Aggregate(same, w);
  for (size_t i = 0; i < fixed.size(); ++i) {
    CHECK(std::fabs(fixed.values()[i] - ps[0].values()[i]) <= 1e-12);
  }
  const std::vector<ModelParams> two = {ps[0], ps[1]};
  CHECK(Aggregate(two, std::vector<double>{1.0, 0.0}).values() == ps[0].values());
  CHECK_THROWS_AS(Aggregate(two, std::vector<double>{0.5, 0.4}), Error);
  CHECK_THROWS_AS(Aggregate(two, std::vector<double>{1.0}), Error);
}

TEST_CASE("client weights are sample shares") {
  const auto shards = TinyShards();
  const auto w = ClientWeights(shards);
  const double n0 = shards[0].SampleCount();
  const double n1 = shards[1].SampleCount();
  CHECK(w[0] == doctest::Approx(n0 / (n0 + n1)));
  CHECK(w[0] + w[1] == doctest::Approx(1.0));
}

TEST_CASE("local training") {
  const auto shards = TinyShards();
  const ModelParams init = ModelParams::Init(TinyModel(), 4);
  FlConfig fl = TinyFl(1);
  fl.local_iters = 0;
  CHECK(LocalTraining(init, shards[0], fl, 0, 1).params.values() == init.values());

  fl.local_iters = 50;
  const LocalResult a = LocalTraining(init, shards[0], fl, 0, 1);
  const LocalResult b = LocalTraining(init, shards[0], fl, 0, 1);
  CHECK(a.steps == 50);
  CHECK(a.params.values() == b.params.values());

  fl.local_iters = 5;
  const double before = LocalTraining(init, shards[0], fl, 0, 2).mean_loss;
  const double after = LocalTraining(a.params, shards[0], fl, 0, 2).mean_loss;
  CHECK(after < before);
}

TEST_CASE("federated training is deterministic and logs every round") {
  const auto shards = TinyShards();
  const auto dir = TempDir("det");
  TrainOptions opts;
  opts.out_dir = dir;
  const TrainResult a = TrainFederated(TinyFl(3), TinyModel(), shards, 5, opts);
  const TrainResult b = TrainFederated(TinyFl(3), TinyModel(), shards, 5);
  CHECK(ParamsDigest(a.params) == ParamsDigest(b.params));
  CHECK(a.log.size() == 3);
  CHECK(std::filesystem::exists(dir / "final.bin"));
  CHECK(std::filesystem::exists(dir / "ckpt_r0000.bin"));
  std::ifstream in(dir / "rounds.jsonl");
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("round").get<int>() == lines);
    CHECK(j.at("per_client_loss").size() == 2);
    ++lines;
  }
  CHECK(lines == 3);

  const TrainResult zero = TrainFederated(TinyFl(0), TinyModel(), shards, 5);
  CHECK(zero.log.empty());
  CHECK(ParamsDigest(zero.params) ==
        ParamsDigest(ModelParams::Init(TinyModel(), DeriveSeed(5, {0x696e6974}))));
  CHECK_THROWS_AS(TrainFederated(TinyFl(1), TinyModel(),
                                 std::span<const DatasetShard>(shards.data(), 1), 5),
                  Error);
}

TEST_CASE("resume reproduces an uninterrupted run") {
  const auto shards = TinyShards();
  FlConfig fl = TinyFl(4);
  fl.checkpoint_every = 2;
  const TrainResult full = TrainFederated(fl, TinyModel(), shards, 8);

  const auto dir = TempDir("resume");
  TrainOptions opts;
  opts.out_dir = dir;
  FlConfig half = fl;
  half.rounds = 2;
  TrainFederated(half, TinyModel(), shards, 8, opts);
  opts.resume = true;
  const TrainResult resumed = TrainFederated(fl, TinyModel(), shards, 8, opts);
  CHECK(resumed.start_round == 2);
  CHECK(resumed.log.size() == 2);
  CHECK(ParamsDigest(resumed.params) == ParamsDigest(full.params));

  try {
    TrainFederated(fl, TinyModel(), shards, 9, opts);
    FAIL("expected integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
  }
}

}  // namespace
}  // namespace mecdt
