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

#include "shuttle/outcome_model.hpp"

#include "shuttle/error.hpp"

namespace shuttle {

ConstantOutcomeModel::ConstantOutcomeModel(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("probability must lie in [0, 1]");
}

PerActionOutcomeModel::PerActionOutcomeModel(const std::array<double, kNumActions>& p) : p_(p) {
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw RangeError("probability must lie in [0, 1]");
  }
}

double PerActionOutcomeModel::probability(const ContextKey&, const Action& a) const {
  return p_[encode_action(a)];
}

}  // namespace shuttle
