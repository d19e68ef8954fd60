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
#include <vector>

#include "shuttle/agents.hpp"
#include "shuttle/nn/optimizer.hpp"

namespace shuttle::detail {

// num_envs single-agent environments that restart themselves at game end.
class EnvPool {
 public:
  EnvPool(const EnvConfig& cfg, int n, std::uint64_t seed);

  int size() const { return static_cast<int>(envs_.size()); }
  int obs_dim() const { return obs_dim_; }
  const std::vector<double>& obs(int i) const { return obs_[static_cast<std::size_t>(i)]; }

  struct Outcome {
    double reward;
    bool done;  // rally over: no bootstrapping across this boundary
  };
  Outcome step(int i, int action);

  std::int64_t rallies() const { return rallies_; }
  // Mean reward of rallies finished since the previous call.
  double take_mean_rally_reward();

 private:
  void restart(int i);

  std::vector<Env> envs_;
  std::vector<std::vector<double>> obs_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::uint64_t> games_;
  int obs_dim_ = 0;
  std::int64_t rallies_ = 0;
  std::int64_t window_rallies_ = 0;
  double window_reward_ = 0.0;
};

std::unique_ptr<nn::Optimizer> optimizer_for(const TrainConfig& cfg, std::size_t n, double lr);

// Throws DivergenceError when logits blow up or parameters turn non-finite.
void divergence_guard(const TrainConfig& cfg, const nn::Network& net, double mean_abs_logit, double loss,
                      std::int64_t update);

std::shared_ptr<MlpPolicy> snapshot(const nn::Network& net, nn::HeadKind head);

// Evaluates (when an evaluator is given) and appends a curve point.
void record_point(const TrainConfig& cfg, const Evaluator& evaluator, const nn::Network& actor,
                  CurvePoint point, TrainingReport& report);

// Categorical draw over exp(log_probs) with one uniform.
int sample_log_probs(std::span<const double> log_probs, Rng& rng);

}  // namespace shuttle::detail
