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

#ifndef MECDT_OPTIMIZER_H_
#define MECDT_OPTIMIZER_H_

#include <span>
#include <vector>

namespace mecdt {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  // Global gradient-norm clip; <= 0 disables clipping.
  double grad_clip = 0.25;
};

// Adam with decoupled weight decay:
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * w)
class AdamW {
 public:
  AdamW(size_t size, const AdamWConfig& cfg);

  // Applies one update in place. 'grad' may be rescaled by the clip.
  void Step(std::span<double> params, std::span<double> grad, double lr);

  int steps() const { return steps_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int steps_ = 0;
};

// Scales 'grad' so its L2 norm is at most max_norm; returns the original norm.
double ClipGradNorm(std::span<double> grad, double max_norm);

}  // namespace mecdt

#endif  // MECDT_OPTIMIZER_H_
