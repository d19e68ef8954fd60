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

// From-scratch A2C, PPO and discrete SAC against a fixed opponent, plus the
// loss functions they minimize (exposed so gradient checks can reach them).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuttle/env.hpp"
#include "shuttle/eval.hpp"
#include "shuttle/nn/action_head.hpp"
#include "shuttle/nn/network.hpp"
#include "shuttle/policy.hpp"

namespace shuttle {

enum class Algorithm : std::uint8_t { A2C, PPO, SAC };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct TrainConfig {
  Algorithm algorithm = Algorithm::PPO;
  std::int64_t total_steps = 200000;
  std::uint64_t seed = 0;

  std::vector<int> hidden = {128, 128};
  nn::HeadKind head = nn::HeadKind::Flat;
  std::string optimizer = "sgd";  // "sgd" (momentum) or "adam"
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  double gamma = 0.99;

  // a2c / ppo
  int num_envs = 4;
  int rollout_length = 32;  // steps per env per update
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double gae_lambda = 0.95;  // ppo
  int epochs = 4;            // ppo
  int minibatch_size = 64;   // ppo and sac
  double clip_epsilon = 0.2; // ppo
  bool clip = true;          // ppo; false gives the unclipped ratio objective
  double value_clip = 0.0;   // ppo; 0 disables value clipping
  bool normalize_advantages = true;  // ppo

  // sac
  double tau = 0.005;
  double target_entropy = 1.5;  // nats
  double initial_temperature = 0.2;
  bool auto_temperature = true;
  double temperature_lr = 3e-4;
  int replay_capacity = 100000;
  int learning_starts = 1000;
  int update_every = 4;

  std::int64_t eval_every = 0;  // env steps between evaluations; 0 = only at the end
  int eval_games = 100;
  bool eval_greedy = true;
  double divergence_threshold = 1e3;

  void validate() const;
};

void to_json(Json& j, const TrainConfig& c);
void from_json(const Json& j, TrainConfig& c);

struct CurvePoint {
  std::int64_t step = 0;
  double eval_win_rate = 0.0;  // NaN without an evaluator
  double eval_ci = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double temperature = 0.0;    // sac only
  double mean_rally_reward = 0.0;
};

struct TrainingReport {
  Algorithm algorithm = Algorithm::PPO;
  std::int64_t steps = 0;
  std::int64_t updates = 0;
  std::int64_t rallies = 0;
  std::vector<CurvePoint> curve;
  // ppo: fraction of samples with r in [1 - eps - 0.05, 1 + eps + 0.05]
  std::optional<double> ratio_in_band;
  std::string config_hash;

  std::string to_csv() const;
};

void to_json(Json& j, const TrainingReport& r);

using Evaluator = std::function<WinRateReport(const PolicyHandle& policy, std::uint64_t seed)>;

struct TrainResult {
  std::shared_ptr<const MlpPolicy> policy;  // stochastic; head 0 of the actor network
  TrainingReport report;
};

// env_cfg must be a single-agent config (opponent set). Each of the
// num_envs environments is seeded with mix_seed(cfg.seed, i).
TrainResult train_a2c(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator = {});
TrainResult train_ppo(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator = {});
TrainResult train_sac(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator = {});
TrainResult train(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator = {});

// ---- losses --------------------------------------------------------------
//
// Each returns batch-mean loss terms. When grad is non-empty (size
// num_params) the gradient of `total` is accumulated into it.

struct OnPolicyBatch {
  int obs_dim = 0;
  std::vector<double> obs;  // size x obs_dim
  std::vector<int> actions;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<double> old_log_probs;
  std::vector<double> old_values;

  int size() const { return static_cast<int>(actions.size()); }
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double mean_abs_logit = 0.0;
  int ratio_in_band = 0;  // ppo: samples inside the diagnostic band
};

struct A2cCoefficients {
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

// policy = -mean(log pi(a) A), value = mean(0.5 (V - R)^2), entropy = mean H
// total = policy + value_coef * value - entropy_coef * entropy
// Network heads: [actor logits, 1 value].
LossTerms a2c_loss(const nn::Network& net, const nn::ActionHead& head, const OnPolicyBatch& batch,
                   const A2cCoefficients& coef, std::span<double> grad = {});

struct PpoCoefficients {
  double clip_epsilon = 0.2;
  bool clip = true;
  double value_clip = 0.0;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

// policy = -mean(min(r A, clip(r, 1-eps, 1+eps) A)) with r = exp(log pi - old log pi)
LossTerms ppo_loss(const nn::Network& net, const nn::ActionHead& head, const OnPolicyBatch& batch,
                   const PpoCoefficients& coef, std::span<double> grad = {});

struct SacBatch {
  int obs_dim = 0;
  std::vector<double> obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> next_obs;
  std::vector<std::uint8_t> dones;

  int size() const { return static_cast<int>(actions.size()); }
};

// y = r + gamma (1 - done) sum_a pi(a|s') (min(Q1', Q2')(s', a) - T log pi(a|s'))
std::vector<double> sac_targets(const nn::Network& actor, const nn::ActionHead& head,
                                const nn::Network& q1_target, const nn::Network& q2_target,
                                const SacBatch& batch, double gamma, double temperature);

// mean(0.5 (Q(s, a) - y)^2)
double sac_critic_loss(const nn::Network& q, const SacBatch& batch, std::span<const double> targets,
                       std::span<double> grad = {});

struct SacActorTerms {
  double loss = 0.0;
  double entropy = 0.0;
  double mean_abs_logit = 0.0;
};

// mean over s of sum_a pi(a|s) (T log pi(a|s) - min(Q1, Q2)(s, a))
SacActorTerms sac_actor_loss(const nn::Network& actor, const nn::ActionHead& head, const nn::Network& q1,
                             const nn::Network& q2, std::span<const double> obs, int batch,
                             double temperature, std::span<double> grad = {});

// exp(log_t) * (entropy - target_entropy); d/d(log_t) written to *grad.
double sac_temperature_loss(double log_temperature, double mean_entropy, double target_entropy,
                            double* grad = nullptr);

// target = tau * online + (1 - tau) * target, elementwise.
void polyak_update(const nn::Network& online, nn::Network& target, double tau);

}  // namespace shuttle
