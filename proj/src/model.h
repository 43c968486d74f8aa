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

#ifndef MECDT_MODEL_H_
#define MECDT_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rng.h"
#include "trajectory.h"
#include "types.h"

namespace mecdt {

enum class InputTransform { kLinear, kSymlog };

// Flat parameter / gradient storage. The kernels map sub-ranges of it as Eigen
// matrices, and vectorized reductions peel a number of leading elements that
// depends on the address alignment. A fixed base alignment keeps results
// bit-identical from one allocation to the next.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

struct ModelConfig {
  int embed_dim = 128;
  int layers = 6;
  int heads = 1;
  double dropout = 0.1;
  int state_dim = 98;
  int action_dim = 40;
  int max_timestep = 128;
  int ffn_mult = 4;
  double init_std = 0.02;
  int prompt_len = 5;
  int context_len = 10;
  // Input features are transform(x / scale); the transform is fixed, not
  // learned.
  double rtg_scale = 1.0;
  InputTransform transform = InputTransform::kSymlog;
  // use_prompt = false drops the trajectory prompt (the no-prompt ablation);
  // use_user_info = false zeroes the user-information part of every state.
  bool use_prompt = true;
  bool use_user_info = true;

  int max_users() const { return action_dim / kActionPerUser; }
  int tokens_per_sample() const {
    return 3 * ((use_prompt ? prompt_len : 0) + context_len);
  }
  // Throws Error(kConfig).
  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
  // Human readable list of differing dimension fields; empty when equal.
  std::string DimensionDiff(const ModelConfig& other) const;
  bool operator==(const ModelConfig&) const = default;
};

ModelConfig ModelConfigForUsers(int max_users);

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  size_t offset = 0;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// Flat parameter vector plus the named tensor layout over it. Gradients and
// optimizer moments share the same layout.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const ModelConfig& cfg);

  // Gaussian projections (init_std), zero biases, unit norm gains.
  static ModelParams Init(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<TensorSpec>& layout() const { return layout_; }
  ParamVector& values() { return values_; }
  const ParamVector& values() const { return values_; }
  size_t size() const { return values_.size(); }
  const TensorSpec& Find(const std::string& name) const;
  bool AllFinite() const;
  // Same weights with a different prompt length (the layout does not depend
  // on it).
  ModelParams WithPromptLen(int prompt_len) const;

 private:
  ModelConfig cfg_;
  std::vector<TensorSpec> layout_;
  ParamVector values_;
};

// One model input: prompt steps followed by context steps, and the action
// targets for every step (prompt and context). mask[i] == 0 drops step i
// from the loss.
struct Sample {
  Prompt prompt;
  std::vector<SeqStep> context;
  std::vector<double> mask;  // one entry per (prompt + context) step
};

struct ForwardOptions {
  bool training = false;  // enables dropout
  Rng* rng = nullptr;     // required when training with dropout > 0
};

// Predicted action (sigmoid range) at every state token, prompt first.
std::vector<Action> Forward(const ModelParams& params, const Sample& sample,
                            const ForwardOptions& opts = {});

double MseLoss(std::span<const Action> pred, std::span<const Action> target,
               std::span<const double> mask);

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;  // same layout as ModelParams::values()
};

// Batch MSE over all unmasked (step, action-entry) pairs of all samples and
// its exact gradient with respect to every parameter.
LossAndGrad LossGrad(const ModelParams& params, std::span<const Sample> batch,
                     const ForwardOptions& opts = {}, int threads = 1);

// Loss only (no tape); dropout off.
double BatchLoss(const ModelParams& params, std::span<const Sample> batch);

// Action for the final (incomplete) context step. The context is truncated
// to the last context_len steps; the final step's action slot is ignored.
// Entries for user slots >= active_users are zeroed.
Action PredictNextAction(const ModelParams& params, const Prompt& prompt,
                         std::span<const SeqStep> context, int active_users);

// Checkpoint container: config, flat named tensors, optimizer record, round.
struct Checkpoint {
  ModelParams params;
  int round = 0;
  nlohmann::json optimizer = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();
};

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Throws Error(kIntegrity) on corruption or when 'expected' is given and its
// dimensions differ from the stored config.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const ModelConfig* expected = nullptr);
std::string ParamsDigest(const ModelParams& params);

}  // namespace mecdt

#endif  // MECDT_MODEL_H_
