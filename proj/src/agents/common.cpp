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

#include "common.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shuttle/error.hpp"

namespace shuttle {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::A2C: return "a2c";
    case Algorithm::PPO: return "ppo";
    case Algorithm::SAC: return "sac";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "a2c") return Algorithm::A2C;
  if (s == "ppo") return Algorithm::PPO;
  if (s == "sac") return Algorithm::SAC;
  throw ParseError("unknown algorithm '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (!(clip_epsilon > 0.0)) throw ValidationError("clip_epsilon must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be >= 0");
  if (total_steps < 1) throw ValidationError("total_steps must be >= 1");
  if (num_envs < 1 || rollout_length < 1 || epochs < 1 || minibatch_size < 1) {
    throw ValidationError("num_envs, rollout_length, epochs and minibatch_size must be >= 1");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ValidationError("gae_lambda must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (!(initial_temperature > 0.0)) throw ValidationError("initial_temperature must be > 0");
  if (replay_capacity < minibatch_size) throw ValidationError("replay_capacity must be >= minibatch_size");
  if (update_every < 1 || learning_starts < 0) throw ValidationError("update_every must be >= 1, learning_starts >= 0");
  if (eval_every < 0 || eval_games < 1) throw ValidationError("eval_every must be >= 0 and eval_games >= 1");
  if (value_clip < 0.0 || entropy_coef < 0.0 || value_coef < 0.0) {
    throw ValidationError("value_clip, entropy_coef and value_coef must be >= 0");
  }
  if (optimizer != "sgd" && optimizer != "adam") throw ValidationError("optimizer must be sgd or adam");
  for (int h : hidden) {
    if (h < 1) throw ValidationError("hidden layer sizes must be >= 1");
  }
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"algorithm", to_string(c.algorithm)},
           {"total_steps", c.total_steps},
           {"seed", c.seed},
           {"hidden", c.hidden},
           {"head", nn::to_string(c.head)},
           {"optimizer", c.optimizer},
           {"learning_rate", c.learning_rate},
           {"momentum", c.momentum},
           {"max_grad_norm", c.max_grad_norm},
           {"gamma", c.gamma},
           {"num_envs", c.num_envs},
           {"rollout_length", c.rollout_length},
           {"entropy_coef", c.entropy_coef},
           {"value_coef", c.value_coef},
           {"gae_lambda", c.gae_lambda},
           {"epochs", c.epochs},
           {"minibatch_size", c.minibatch_size},
           {"clip_epsilon", c.clip_epsilon},
           {"clip", c.clip},
           {"value_clip", c.value_clip},
           {"normalize_advantages", c.normalize_advantages},
           {"tau", c.tau},
           {"target_entropy", c.target_entropy},
           {"initial_temperature", c.initial_temperature},
           {"auto_temperature", c.auto_temperature},
           {"temperature_lr", c.temperature_lr},
           {"replay_capacity", c.replay_capacity},
           {"learning_starts", c.learning_starts},
           {"update_every", c.update_every},
           {"eval_every", c.eval_every},
           {"eval_games", c.eval_games},
           {"eval_greedy", c.eval_greedy},
           {"divergence_threshold", c.divergence_threshold}};
}

void from_json(const Json& j, TrainConfig& c) {
  TrainConfig d;
  if (!j.is_object()) throw ParseError("train config must be a JSON object");
  Json known;
  to_json(known, d);
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError("unknown train config key '" + key + "'");
  }
  try {
    if (j.contains("algorithm")) d.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("head")) d.head = nn::parse_head_kind(j.at("head").get<std::string>());
    auto take = [&j](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    take("total_steps", d.total_steps);
    take("seed", d.seed);
    take("hidden", d.hidden);
    take("optimizer", d.optimizer);
    take("learning_rate", d.learning_rate);
    take("momentum", d.momentum);
    take("max_grad_norm", d.max_grad_norm);
    take("gamma", d.gamma);
    take("num_envs", d.num_envs);
    take("rollout_length", d.rollout_length);
    take("entropy_coef", d.entropy_coef);
    take("value_coef", d.value_coef);
    take("gae_lambda", d.gae_lambda);
    take("epochs", d.epochs);
    take("minibatch_size", d.minibatch_size);
    take("clip_epsilon", d.clip_epsilon);
    take("clip", d.clip);
    take("value_clip", d.value_clip);
    take("normalize_advantages", d.normalize_advantages);
    take("tau", d.tau);
    take("target_entropy", d.target_entropy);
    take("initial_temperature", d.initial_temperature);
    take("auto_temperature", d.auto_temperature);
    take("temperature_lr", d.temperature_lr);
    take("replay_capacity", d.replay_capacity);
    take("learning_starts", d.learning_starts);
    take("update_every", d.update_every);
    take("eval_every", d.eval_every);
    take("eval_games", d.eval_games);
    take("eval_greedy", d.eval_greedy);
    take("divergence_threshold", d.divergence_threshold);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c = std::move(d);
}

void to_json(Json& j, const TrainingReport& r) {
  Json curve = Json::array();
  auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  for (const auto& p : r.curve) {
    curve.push_back(Json{{"step", p.step},
                         {"eval_win_rate", num(p.eval_win_rate)},
                         {"eval_ci", num(p.eval_ci)},
                         {"policy_loss", p.policy_loss},
                         {"value_loss", p.value_loss},
                         {"entropy", p.entropy},
                         {"temperature", p.temperature},
                         {"mean_rally_reward", p.mean_rally_reward}});
  }
  j = Json{{"algorithm", to_string(r.algorithm)},
           {"steps", r.steps},
           {"updates", r.updates},
           {"rallies", r.rallies},
           {"config_hash", r.config_hash},
           {"curve", curve},
           {"ratio_in_band", r.ratio_in_band ? Json(*r.ratio_in_band) : Json(nullptr)}};
}

std::string TrainingReport::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "step,eval_win_rate,eval_ci,policy_loss,value_loss,entropy,temperature,mean_rally_reward\n";
  for (const auto& p : curve) {
    out << p.step << ',';
    if (!std::isnan(p.eval_win_rate)) out << p.eval_win_rate;
    out << ',';
    if (!std::isnan(p.eval_ci)) out << p.eval_ci;
    out << ',' << p.policy_loss << ',' << p.value_loss << ',' << p.entropy << ',' << p.temperature << ','
        << p.mean_rally_reward << '\n';
  }
  return out.str();
}

TrainResult train(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator) {
  switch (cfg.algorithm) {
    case Algorithm::A2C: return train_a2c(env_cfg, cfg, evaluator);
    case Algorithm::PPO: return train_ppo(env_cfg, cfg, evaluator);
    case Algorithm::SAC: return train_sac(env_cfg, cfg, evaluator);
  }
  throw ValidationError("unknown algorithm");
}

namespace detail {

EnvPool::EnvPool(const EnvConfig& cfg, int n, std::uint64_t seed) {
  cfg.validate(true);
  obs_dim_ = observation_dim(cfg.observation.history_window);
  for (int i = 0; i < n; ++i) {
    EnvConfig c = cfg;
    c.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    seeds_.push_back(c.seed);
    games_.push_back(0);
    envs_.emplace_back(std::move(c));
    obs_.emplace_back();
    restart(i);
  }
}

void EnvPool::restart(int i) {
  const auto k = static_cast<std::size_t>(i);
  // A game can end on opponent serves alone; keep starting new ones.
  do {
    obs_[k] = envs_[k].reset(mix_seed(seeds_[k], games_[k]++)).features;
  } while (envs_[k].game_done());
}

EnvPool::Outcome EnvPool::step(int i, int action) {
  const auto k = static_cast<std::size_t>(i);
  const StepResult r = envs_[k].step(decode_action(action));
  if (r.rally_done) {
    ++rallies_;
    ++window_rallies_;
    window_reward_ += r.reward;
  }
  if (r.game_done) {
    restart(i);
  } else {
    obs_[k] = r.observation.features;
  }
  return {r.reward, r.rally_done};
}

double EnvPool::take_mean_rally_reward() {
  const double m = window_rallies_ ? window_reward_ / static_cast<double>(window_rallies_) : 0.0;
  window_rallies_ = 0;
  window_reward_ = 0.0;
  return m;
}

std::unique_ptr<nn::Optimizer> optimizer_for(const TrainConfig& cfg, std::size_t n, double lr) {
  return nn::make_optimizer(cfg.optimizer, n, lr, cfg.momentum);
}

void divergence_guard(const TrainConfig& cfg, const nn::Network& net, double mean_abs_logit, double loss,
                      std::int64_t update) {
  if (!(mean_abs_logit <= cfg.divergence_threshold) || !std::isfinite(loss) || !net.all_finite()) {
    std::ostringstream msg;
    msg << to_string(cfg.algorithm) << " diverged at update " << update << ": mean |logit| = " << mean_abs_logit
        << " (threshold " << cfg.divergence_threshold << "), loss = " << loss
        << ", parameters finite = " << (net.all_finite() ? "yes" : "no");
    throw DivergenceError(msg.str());
  }
}

std::shared_ptr<MlpPolicy> snapshot(const nn::Network& net, nn::HeadKind head) {
  return std::make_shared<MlpPolicy>(net, head, false);
}

void record_point(const TrainConfig& cfg, const Evaluator& evaluator, const nn::Network& actor,
                  CurvePoint point, TrainingReport& report) {
  point.eval_win_rate = std::numeric_limits<double>::quiet_NaN();
  point.eval_ci = std::numeric_limits<double>::quiet_NaN();
  if (evaluator) {
    auto policy = std::make_shared<const MlpPolicy>(actor, cfg.head, cfg.eval_greedy);
    const WinRateReport r = evaluator(policy, mix_seed(cfg.seed, 0xe7a1));
    point.eval_win_rate = r.win_rate;
    point.eval_ci = r.ci_halfwidth;
  }
  report.curve.push_back(point);
}

int sample_log_probs(std::span<const double> log_probs, Rng& rng) {
  std::vector<double> p(log_probs.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_probs[i]);
  return static_cast<int>(rng.categorical(p));
}

}  // namespace detail
}  // namespace shuttle
