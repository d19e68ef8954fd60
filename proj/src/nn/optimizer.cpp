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

#include "shuttle/nn/optimizer.hpp"

#include <cmath>

#include "shuttle/error.hpp"

namespace shuttle::nn {

namespace {
void check_sizes(std::size_t state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != state || grad.size() != state) {
    throw ValidationError("optimizer state does not match parameter count");
  }
}
}  // namespace

SgdMomentum::SgdMomentum(std::size_t n, double lr, double momentum)
    : lr_(lr), momentum_(momentum), velocity_(n, 0.0) {}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad) {
  check_sizes(velocity_.size(), params, grad);
  kernels::active().momentum_step(lr_, momentum_, grad.data(), velocity_.data(), params.data(),
                                  params.size());
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  check_sizes(m_.size(), params, grad);
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  const kernels::AdamParams hp{lr_, beta1_, beta2_, eps_, 1.0 - beta1_pow_, 1.0 - beta2_pow_};
  kernels::active().adam_step(hp, grad.data(), m_.data(), v_.data(), params.data(), params.size());
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, std::size_t n, double lr,
                                          double momentum) {
  if (kind == "sgd") return std::make_unique<SgdMomentum>(n, lr, momentum);
  if (kind == "adam") return std::make_unique<Adam>(n, lr);
  throw ValidationError("unknown optimizer '" + kind + "'");
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  const double norm = std::sqrt(kernels::active().dot(grad.data(), grad.data(), grad.size()));
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

}  // namespace shuttle::nn
