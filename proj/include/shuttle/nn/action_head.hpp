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
#include <span>
#include <string_view>

#include "shuttle/domain.hpp"

namespace shuttle::nn {

// Flat: one softmax over all 486 actions (supports masking).
// Factored: independent softmaxes over shot (6), zone (9), height (3) and
// exec code (3); log pi(a) is the sum of the component log-probabilities.
enum class HeadKind : std::uint8_t { Flat, Factored };

std::string_view to_string(HeadKind k);
HeadKind parse_head_kind(std::string_view s);

// One byte per flat action, nonzero = legal. Empty span = everything legal.
using ActionMask = std::span<const std::uint8_t>;

class ActionHead {
 public:
  explicit ActionHead(HeadKind kind = HeadKind::Flat) : kind_(kind) {}

  HeadKind kind() const { return kind_; }
  int logits_dim() const { return kind_ == HeadKind::Flat ? kNumActions : 6 + 9 + 3 + 3; }

  // Log-probabilities of all 486 actions; -inf for masked actions.
  void log_probs(std::span<const double> logits, std::span<double> out, ActionMask mask = {}) const;
  double log_prob(std::span<const double> logits, int action, ActionMask mask = {}) const;
  double entropy(std::span<const double> logits, ActionMask mask = {}) const;

  // dlogits += coef * d(log pi(action)) / d(logits)
  void add_grad_log_prob(std::span<const double> logits, int action, double coef,
                         std::span<double> dlogits, ActionMask mask = {}) const;
  // dlogits += sum_a weights[a] * d(log pi(a)) / d(logits); weights has 486 entries
  void add_grad_weighted_log_probs(std::span<const double> logits, std::span<const double> weights,
                                   std::span<double> dlogits, ActionMask mask = {}) const;
  // dlogits += coef * d(entropy) / d(logits)
  void add_grad_entropy(std::span<const double> logits, double coef, std::span<double> dlogits,
                        ActionMask mask = {}) const;

 private:
  HeadKind kind_;
};

}  // namespace shuttle::nn
