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

#include <cmath>

#include "common.hpp"
#include "shuttle/error.hpp"

namespace shuttle {

namespace {

class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, int obs_dim)
      : capacity_(static_cast<std::size_t>(capacity)),
        dim_(static_cast<std::size_t>(obs_dim)),
        obs_(capacity_ * dim_),
        next_obs_(capacity_ * dim_),
        actions_(capacity_),
        rewards_(capacity_),
        dones_(capacity_) {}

  void push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs, bool done) {
    std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
    std::copy(next_obs.begin(), next_obs.end(), next_obs_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
    actions_[head_] = action;
    rewards_[head_] = reward;
    dones_[head_] = done ? 1 : 0;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }

  std::size_t size() const { return size_; }

  SacBatch sample(int n, Rng& rng) const {
    SacBatch b;
    b.obs_dim = static_cast<int>(dim_);
    b.obs.reserve(static_cast<std::size_t>(n) * dim_);
    b.next_obs.reserve(static_cast<std::size_t>(n) * dim_);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = rng.below(size_);
      b.obs.insert(b.obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(k * dim_),
                   obs_.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim_));
      b.next_obs.insert(b.next_obs.end(), next_obs_.begin() + static_cast<std::ptrdiff_t>(k * dim_),
                        next_obs_.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim_));
      b.actions.push_back(actions_[k]);
      b.rewards.push_back(rewards_[k]);
      b.dones.push_back(dones_[k]);
    }
    return b;
  }

 private:
  std::size_t capacity_, dim_;
  std::vector<double> obs_, next_obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> dones_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace

TrainResult train_sac(const EnvConfig& env_cfg, const TrainConfig& cfg_in, const Evaluator& evaluator) {
  TrainConfig cfg = cfg_in;
  cfg.algorithm = Algorithm::SAC;
  cfg.validate();
  const nn::ActionHead head(cfg.head);
  detail::EnvPool pool(env_cfg, cfg.num_envs, cfg.seed);
  const int dim = pool.obs_dim();

  Rng init_rng(mix_seed(cfg.seed, 0x1417));
  nn::Network actor(dim, cfg.hidden, {head.logits_dim()});
  nn::Network q1(dim, cfg.hidden, {kNumActions});
  nn::Network q2(dim, cfg.hidden, {kNumActions});
  const std::vector<double> actor_scale = {0.01};
  const std::vector<double> q_scale = {1.0};
  actor.init(init_rng, actor_scale);
  q1.init(init_rng, q_scale);
  q2.init(init_rng, q_scale);
  nn::Network q1_target = q1;
  nn::Network q2_target = q2;
  auto opt_actor = detail::optimizer_for(cfg, actor.num_params(), cfg.learning_rate);
  auto opt_q1 = detail::optimizer_for(cfg, q1.num_params(), cfg.learning_rate);
  auto opt_q2 = detail::optimizer_for(cfg, q2.num_params(), cfg.learning_rate);
  double log_temperature = std::log(cfg.initial_temperature);

  Rng act_rng(mix_seed(cfg.seed, 0xac7));
  Rng replay_rng(mix_seed(cfg.seed, 0x5f1));
  ReplayBuffer replay(cfg.replay_capacity, dim);

  TrainingReport report;
  report.algorithm = Algorithm::SAC;
  Json cj;
  to_json(cj, cfg);
  report.config_hash = fingerprint(cj);

  std::vector<double> ga(actor.num_params()), g1(q1.num_params()), g2(q2.num_params());
  std::vector<double> step_obs(static_cast<std::size_t>(pool.size()) * dim);
  std::vector<double> lp(kNumActions);
  nn::ForwardCache cache;
  std::int64_t next_eval = cfg.eval_every > 0 ? cfg.eval_every : -1;
  double last_critic = 0.0;
  SacActorTerms last_actor;

  while (report.steps < cfg.total_steps) {
    for (int e = 0; e < pool.size(); ++e) {
      std::copy(pool.obs(e).begin(), pool.obs(e).end(), step_obs.begin() + static_cast<std::ptrdiff_t>(e) * dim);
    }
    nn::forward(actor, step_obs, pool.size(), cache);
    for (int e = 0; e < pool.size(); ++e) {
      head.log_probs(cache.head_row(0, e, head.logits_dim()), lp);
      const int a = detail::sample_log_probs(lp, act_rng);
      const auto out = pool.step(e, a);
      replay.push(std::span<const double>(step_obs).subspan(static_cast<std::size_t>(e) * dim, static_cast<std::size_t>(dim)),
                  a, out.reward, pool.obs(e), out.done);
      ++report.steps;

      if (report.steps < cfg.learning_starts || report.steps % cfg.update_every != 0 ||
          replay.size() < static_cast<std::size_t>(cfg.minibatch_size)) {
        continue;
      }
      const double temperature = std::exp(log_temperature);
      const SacBatch batch = replay.sample(cfg.minibatch_size, replay_rng);
      const std::vector<double> y = sac_targets(actor, head, q1_target, q2_target, batch, cfg.gamma, temperature);

      std::fill(g1.begin(), g1.end(), 0.0);
      last_critic = sac_critic_loss(q1, batch, y, g1);
      nn::clip_grad_norm(g1, cfg.max_grad_norm);
      opt_q1->step(q1.params(), g1);
      std::fill(g2.begin(), g2.end(), 0.0);
      last_critic = 0.5 * (last_critic + sac_critic_loss(q2, batch, y, g2));
      nn::clip_grad_norm(g2, cfg.max_grad_norm);
      opt_q2->step(q2.params(), g2);

      std::fill(ga.begin(), ga.end(), 0.0);
      last_actor = sac_actor_loss(actor, head, q1, q2, batch.obs, batch.size(), temperature, ga);
      nn::clip_grad_norm(ga, cfg.max_grad_norm);
      opt_actor->step(actor.params(), ga);

      if (cfg.auto_temperature) {
        double gt = 0.0;
        sac_temperature_loss(log_temperature, last_actor.entropy, cfg.target_entropy, &gt);
        log_temperature -= cfg.temperature_lr * gt;
      }
      polyak_update(q1, q1_target, cfg.tau);
      polyak_update(q2, q2_target, cfg.tau);
      ++report.updates;
      detail::divergence_guard(cfg, actor, last_actor.mean_abs_logit, last_actor.loss + last_critic, report.updates);
      if (!q1.all_finite() || !q2.all_finite()) {
        throw DivergenceError("sac diverged at update " + std::to_string(report.updates) + ": critic parameters non-finite");
      }
    }

    const bool final = report.steps >= cfg.total_steps;
    if (final || (next_eval > 0 && report.steps >= next_eval)) {
      CurvePoint p;
      p.step = report.steps;
      p.policy_loss = last_actor.loss;
      p.value_loss = last_critic;
      p.entropy = last_actor.entropy;
      p.temperature = std::exp(log_temperature);
      p.mean_rally_reward = pool.take_mean_rally_reward();
      detail::record_point(cfg, evaluator, actor, p, report);
      while (next_eval > 0 && next_eval <= report.steps) next_eval += cfg.eval_every;
    }
  }
  report.rallies = pool.rallies();
  auto policy = detail::snapshot(actor, cfg.head);
  policy->set_metadata(Json{{"algorithm", "sac"}, {"config_hash", report.config_hash}, {"steps", report.steps}});
  return TrainResult{policy, std::move(report)};
}

}  // namespace shuttle
