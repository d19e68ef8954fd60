// Copyright 2026 The Shuttle Authors.
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

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shuttle/nn/kernels.hpp"

namespace shuttle::nn {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // params -= update(grad). grad is the gradient of the loss to minimize.
  virtual void step(std::span<double> params, std::span<const double> grad) = 0;
};

// v = momentum * v + g; p -= lr * v
class SgdMomentum final : public Optimizer {
 public:
  SgdMomentum(std::size_t n, double lr, double momentum);
  void step(std::span<double> params, std::span<const double> grad) override;

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

class Adam final : public Optimizer {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// kind: "sgd" or "adam"
std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, std::size_t n, double lr,
                                          double momentum);

// Clips grad in place to L2 norm <= max_norm (no-op when max_norm <= 0).
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace shuttle::nn
