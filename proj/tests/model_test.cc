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

#include "model.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "status.h"

namespace mecdt {
namespace {

ModelConfig TinyConfig() {
  ModelConfig c = ModelConfigForUsers(2);
  c.embed_dim = 16;
  c.layers = 2;
  c.max_timestep = 16;
  c.prompt_len = 2;
  c.context_len = 3;
  c.dropout = 0.0;
  return c;
}

SeqStep RandomStep(const ModelConfig& c, int t, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeqStep s;
  s.rtg = -300.0 * u(rng);
  s.timestep = t;
  s.state.resize(c.state_dim);
  for (auto& v : s.state) v = 4.0 * u(rng) - 1.0;
  s.action.resize(c.action_dim);
  for (auto& v : s.action) v = u(rng);
  return s;
}

Sample RandomSample(const ModelConfig& c, Rng& rng) {
  Sample s;
  for (int i = 0; i < c.prompt_len; ++i) s.prompt.push_back(RandomStep(c, i, rng));
  for (int i = 0; i < c.context_len; ++i) {
    s.context.push_back(RandomStep(c, 3 + i, rng));
  }
  s.mask.assign(c.prompt_len + c.context_len, 1.0);
  return s;
}

// Central finite differences against the analytic gradient on a spread of
// parameter indices covering every tensor.
void CheckGradient(const ModelConfig& cfg, uint64_t dropout_seed) {
  ModelParams p = ModelParams::Init(cfg, 7);
  // Perturb gains and biases away from their trivial init values.
  Rng jitter(11);
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& v : p.values()) v += n(jitter);
  Rng rng(3);
  std::vector<Sample> batch = {RandomSample(cfg, rng), RandomSample(cfg, rng)};
  batch[1].mask[1] = 0.0;

  auto loss_at = [&](const ModelParams& q) {
    Rng r(dropout_seed);
    ForwardOptions o{cfg.dropout > 0, &r};
    return LossGrad(q, batch, o).loss;
  };
  Rng r(dropout_seed);
  const LossAndGrad analytic =
      LossGrad(p, batch, ForwardOptions{cfg.dropout > 0, &r});

  int checked = 0;
  for (const auto& t : p.layout()) {
    const size_t stride = std::max<size_t>(1, t.size() / 7);
    for (size_t k = 0; k < t.size(); k += stride) {
      const size_t i = t.offset + k;
      const double h = 1e-5;
      ModelParams q = p;
      q.values()[i] += h;
      const double up = loss_at(q);
      q.values()[i] -= 2 * h;
      const double down = loss_at(q);
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.grad[i];
      INFO(t.name, "[", k, "] analytic=", a, " numeric=", numeric);
      CHECK(std::fabs(a - numeric) <= 1e-7 + 1e-4 * std::max(std::fabs(a), std::fabs(numeric)));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("analytic gradient matches finite differences") {
  CheckGradient(TinyConfig(), 0);
}

TEST_CASE("gradient with dropout matches finite differences at fixed masks") {
  ModelConfig c = TinyConfig();
  c.dropout = 0.3;
  CheckGradient(c, 99);
}

TEST_CASE("gradient matches in the no-prompt linear ablation") {
  ModelConfig c = TinyConfig();
  c.use_prompt = false;
  c.use_user_info = false;
  c.transform = InputTransform::kLinear;
  CheckGradient(c, 0);
}

TEST_CASE("threaded gradient equals single-thread gradient") {
  const ModelConfig c = TinyConfig();
  const ModelParams p = ModelParams::Init(c, 1);
  Rng rng(5);
  std::vector<Sample> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(RandomSample(c, rng));
  const LossAndGrad a = LossGrad(p, batch, {}, 1);
  const LossAndGrad b = LossGrad(p, batch, {}, 3);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  for (size_t i = 0; i < a.grad.size(); ++i) {
    REQUIRE(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-9));
  }
  CHECK(BatchLoss(p, batch) == doctest::Approx(a.loss).epsilon(1e-12));
}

TEST_CASE("predictions are causal") {
  const ModelConfig c = TinyConfig();
  const ModelParams p = ModelParams::Init(c, 2);
  Rng rng(9);
  const Sample base = RandomSample(c, rng);
  const auto ref = Forward(p, base);
  const int np = c.prompt_len;

  // Changing step j's state moves predictions at j and later only.
  for (int j = 0; j < c.context_len; ++j) {
    Sample s = base;
    for (auto& v : s.context[j].state) v += 0.5;
    const auto out = Forward(p, s);
    for (int i = 0; i < np + j; ++i) CHECK(out[i] == ref[i]);
    CHECK(out[np + j] != ref[np + j]);
  }
  // The action at step j is not visible to the prediction at step j.
  for (int j = 0; j < c.context_len; ++j) {
    Sample s = base;
    for (auto& v : s.context[j].action) v = 1.0 - v;
    const auto out = Forward(p, s);
    for (int i = 0; i <= np + j; ++i) CHECK(out[i] == ref[i]);
  }
}

TEST_CASE("outputs stay in the unit interval and have the action width") {
  const ModelConfig c = TinyConfig();
  const ModelParams p = ModelParams::Init(c, 4);
  Rng rng(1);
  const auto out = Forward(p, RandomSample(c, rng));
  REQUIRE(out.size() == static_cast<size_t>(c.prompt_len + c.context_len));
  for (const auto& a : out) {
    REQUIRE(a.size() == static_cast<size_t>(c.action_dim));
    for (double v : a) CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("ablation ignores prompt and user information") {
  ModelConfig c = TinyConfig();
  c.use_prompt = false;
  c.use_user_info = false;
  const ModelParams p = ModelParams::Init(c, 4);
  Rng rng(1);
  const Sample base = RandomSample(c, rng);
  Sample s = base;
  for (auto& st : s.prompt) st.rtg += 50;
  for (auto& st : s.context) {
    for (int u = 0; u < c.max_users(); ++u) st.state[c.state_dim - 1 - u] = 0.2;
  }
  const auto a = Forward(p, base);
  const auto b = Forward(p, s);
  REQUIRE(a.size() == static_cast<size_t>(c.context_len));
  CHECK(a == b);
}

TEST_CASE("next-action prediction truncates context and zeroes idle users") {
  const ModelConfig c = TinyConfig();
  const ModelParams p = ModelParams::Init(c, 4);
  Rng rng(2);
  const Sample s = RandomSample(c, rng);
  std::vector<SeqStep> long_ctx;
  for (int i = 0; i < 6; ++i) long_ctx.push_back(RandomStep(c, i, rng));
  const std::vector<SeqStep> tail(long_ctx.end() - c.context_len, long_ctx.end());
  const Action a = PredictNextAction(p, s.prompt, long_ctx, 1);
  const Action b = PredictNextAction(p, s.prompt, tail, 1);
  CHECK(a == b);
  for (int j = kActionPerUser; j < c.action_dim; ++j) CHECK(a[j] == 0.0);
  // The last step's stored action must not matter.
  std::vector<SeqStep> other = tail;
  for (auto& v : other.back().action) v = 0.9;
  CHECK(PredictNextAction(p, s.prompt, other, 1) == a);
}

TEST_CASE("wrong input width is rejected") {
  const ModelConfig c = TinyConfig();
  const ModelParams p = ModelParams::Init(c, 4);
  Rng rng(2);
  Sample s = RandomSample(c, rng);
  s.context[0].state.pop_back();
  CHECK_THROWS_AS(Forward(p, s), Error);
}

TEST_CASE("default model has the documented dimensions") {
  const ModelConfig c;
  CHECK(c.state_dim == 98);
  CHECK(c.action_dim == 40);
  CHECK(c.max_users() == 8);
  CHECK(c.tokens_per_sample() == 45);
  CHECK(ModelConfigForUsers(8) == c);
  ModelConfig bad = c;
  bad.state_dim = 97;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("init is seeded") {
  const ModelConfig c = TinyConfig();
  CHECK(ParamsDigest(ModelParams::Init(c, 1)) == ParamsDigest(ModelParams::Init(c, 1)));
  CHECK(ParamsDigest(ModelParams::Init(c, 1)) != ParamsDigest(ModelParams::Init(c, 2)));
  const ModelParams p = ModelParams::Init(c, 1);
  const auto& g = p.Find("block1.ln2.g");
  CHECK(p.values()[g.offset] == 1.0);
  const auto& b = p.Find("head.b");
  CHECK(p.values()[b.offset] == 0.0);
}

TEST_CASE("checkpoint round trip and dimension mismatch") {
  const ModelConfig c = TinyConfig();
  Checkpoint ck;
  ck.params = ModelParams::Init(c, 5);
  ck.round = 3;
  ck.optimizer = {{"lr", 1e-4}};
  const auto dir = std::filesystem::temp_directory_path() / "mecdt_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ck.bin";
  SaveCheckpoint(ck, path);
  const Checkpoint back = LoadCheckpoint(path, &c);
  CHECK(back.round == 3);
  CHECK(back.optimizer == ck.optimizer);
  CHECK(back.params.config() == c);
  CHECK(back.params.values() == ck.params.values());

  const ModelConfig wide = ModelConfigForUsers(8);
  try {
    LoadCheckpoint(path, &wide);
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
    const std::string what = e.what();
    CHECK(what.find("98") != std::string::npos);
    CHECK(what.find("40") != std::string::npos);
  }

  // Flip one payload byte.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-100, std::ios::end);
    char ch;
    f.read(&ch, 1);
    f.seekp(-100, std::ios::end);
    ch = static_cast<char>(ch ^ 0x5a);
    f.write(&ch, 1);
  }
  CHECK_THROWS_AS(LoadCheckpoint(path), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("non-finite parameters are rejected") {
  const ModelConfig c = TinyConfig();
  ModelParams p = ModelParams::Init(c, 4);
  p.values()[10] = std::nan("");
  Rng rng(1);
  CHECK_THROWS_AS(Forward(p, RandomSample(c, rng)), Error);
}

TEST_CASE("masked mean squared error") {
  const std::vector<Action> pred = {{0.5, 0.5}, {1.0, 0.0}};
  const std::vector<Action> target = {{0.0, 1.0}, {1.0, 1.0}};
  CHECK(MseLoss(pred, target, {}) == doctest::Approx((0.25 + 0.25 + 0 + 1) / 4));
  const std::vector<double> mask = {1.0, 0.0};
  CHECK(MseLoss(pred, target, mask) == doctest::Approx(0.25));
}

}  // namespace
}  // namespace mecdt
