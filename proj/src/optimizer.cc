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

#include "optimizer.h"

#include <cmath>

#include "status.h"

namespace mecdt {

AdamW::AdamW(size_t size, const AdamWConfig& cfg)
    : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

double ClipGradNorm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

void AdamW::Step(std::span<double> params, std::span<double> grad, double lr) {
  Require(params.size() == m_.size() && grad.size() == m_.size(),
          "optimizer size mismatch");
  ClipGradNorm(grad, cfg_.grad_clip);
  ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, steps_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, steps_);
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double update = (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
    params[i] -= lr * (update + cfg_.weight_decay * params[i]);
  }
}

}  // namespace mecdt
