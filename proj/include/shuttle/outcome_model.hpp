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

#include <array>
#include <memory>

#include "shuttle/context.hpp"

namespace shuttle {

// Probability of a binary shot outcome given the context and the action.
// Success models are queried with the hitter's context; return models with
// the defender's context, i.e. ContextKey::facing(action).
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;
  virtual double probability(const ContextKey& ctx, const Action& a) const = 0;
};

using OutcomeModelPtr = std::shared_ptr<const OutcomeModel>;

class ConstantOutcomeModel final : public OutcomeModel {
 public:
  explicit ConstantOutcomeModel(double p);
  double probability(const ContextKey&, const Action&) const override { return p_; }

 private:
  double p_;
};

// Context-free probability per flat action index (bandit-style test envs).
class PerActionOutcomeModel final : public OutcomeModel {
 public:
  explicit PerActionOutcomeModel(const std::array<double, kNumActions>& p);
  double probability(const ContextKey&, const Action& a) const override;

 private:
  std::array<double, kNumActions> p_;
};

inline OutcomeModelPtr constant_model(double p) {
  return std::make_shared<ConstantOutcomeModel>(p);
}

}  // namespace shuttle
