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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.hpp"
#include "shuttle/error.hpp"

namespace shuttle {

namespace {

OnPolicyBatch subset(const OnPolicyBatch& b, std::span<const std::size_t> idx) {
  OnPolicyBatch s;
  s.obs_dim = b.obs_dim;
  s.obs.reserve(idx.size() * static_cast<std::size_t>(b.obs_dim));
  for (std::size_t i : idx) {
    const auto* row = b.obs.data() + i * static_cast<std::size_t>(b.obs_dim);
    s.obs.insert(s.obs.end(), row, row + b.obs_dim);
    s.actions.push_back(b.actions[i]);
    s.advantages.push_back(b.advantages[i]);
    s.returns.push_back(b.returns[i]);
    s.old_log_probs.push_back(b.old_log_probs[i]);
    s.old_values.push_back(b.old_values[i]);
  }
  return s;
}

TrainResult train_on_policy(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator) {
  cfg.validate();
  const bool ppo = cfg.algorithm == Algorithm::PPO;
  const nn::ActionHead head(cfg.head);
  detail::EnvPool pool(env_cfg, cfg.num_envs, cfg.seed);
  const int dim = pool.obs_dim();
  const int n_envs = pool.size();
  const int horizon = cfg.rollout_length;

  nn::Network net(dim, cfg.hidden, {head.logits_dim(), 1});
  Rng init_rng(mix_seed(cfg.seed, 0x1417));
  const std::vector<double> head_scales = {0.01, 1.0};
  net.init(init_rng, head_scales);
  auto opt = detail::optimizer_for(cfg, net.num_params(), cfg.learning_rate);
  Rng act_rng(mix_seed(cfg.seed, 0xac7));
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5f1));

  TrainingReport report;
  report.algorithm = cfg.algorithm;
  Json cj;
  to_json(cj, cfg);
  report.config_hash = fingerprint(cj);

  const std::size_t n = static_cast<std::size_t>(horizon) * n_envs;
  std::vector<double> grad(net.num_params());
  std::vector<double> rewards(n), values(n);
  std::vector<std::uint8_t> dones(n);
  std::vector<double> lp(kNumActions);
  std::vector<double> step_obs(static_cast<std::size_t>(n_envs) * dim);
  nn::ForwardCache cache;
  std::int64_t band_hits = 0;
  std::int64_t band_total = 0;
  std::int64_t next_eval = cfg.eval_every > 0 ? cfg.eval_every : -1;
  LossTerms last;

  auto gather_obs = [&] {
    for (int e = 0; e < n_envs; ++e) std::copy(pool.obs(e).begin(), pool.obs(e).end(), step_obs.begin() + static_cast<std::ptrdiff_t>(e) * dim);
  };

  while (report.steps < cfg.total_steps) {
    OnPolicyBatch batch;
    batch.obs_dim = dim;
    batch.obs.resize(n * static_cast<std::size_t>(dim));
    batch.actions.resize(n);
    batch.old_log_probs.resize(n);
    for (int t = 0; t < horizon; ++t) {
      gather_obs();
      nn::forward(net, step_obs, n_envs, cache);
      for (int e = 0; e < n_envs; ++e) {
        const std::size_t k = static_cast<std::size_t>(t) * n_envs + e;
        std::copy(step_obs.begin() + static_cast<std::ptrdiff_t>(e) * dim,
                  step_obs.begin() + static_cast<std::ptrdiff_t>(e + 1) * dim,
                  batch.obs.begin() + static_cast<std::ptrdiff_t>(k) * dim);
        head.log_probs(cache.head_row(0, e, head.logits_dim()), lp);
        const int a = detail::sample_log_probs(lp, act_rng);
        batch.actions[k] = a;
        batch.old_log_probs[k] = lp[static_cast<std::size_t>(a)];
        values[k] = cache.heads[1][static_cast<std::size_t>(e)];
        const auto out = pool.step(e, a);
        rewards[k] = out.reward;
        dones[k] = out.done ? 1 : 0;
      }
      report.steps += n_envs;
    }
    gather_obs();
    nn::forward(net, step_obs, n_envs, cache);
    const std::vector<double> bootstrap(cache.heads[1].begin(), cache.heads[1].end());

    batch.advantages.resize(n);
    batch.returns.resize(n);
    batch.old_values = values;
    for (int e = 0; e < n_envs; ++e) {
      double next_value = bootstrap[static_cast<std::size_t>(e)];
      double running = ppo ? 0.0 : next_value;
      for (int t = horizon - 1; t >= 0; --t) {
        const std::size_t k = static_cast<std::size_t>(t) * n_envs + e;
        const double live = dones[k] ? 0.0 : 1.0;
        if (ppo) {
          const double delta = rewards[k] + cfg.gamma * live * next_value - values[k];
          running = delta + cfg.gamma * cfg.gae_lambda * live * running;
          batch.advantages[k] = running;
          batch.returns[k] = running + values[k];
          next_value = values[k];
        } else {
          running = rewards[k] + cfg.gamma * live * running;
          batch.returns[k] = running;
          batch.advantages[k] = running - values[k];
        }
      }
    }

    if (!ppo) {
      std::fill(grad.begin(), grad.end(), 0.0);
      last = a2c_loss(net, head, batch, A2cCoefficients{cfg.value_coef, cfg.entropy_coef}, grad);
      nn::clip_grad_norm(grad, cfg.max_grad_norm);
      opt->step(net.params(), grad);
      ++report.updates;
      detail::divergence_guard(cfg, net, last.mean_abs_logit, last.total, report.updates);
    } else {
      if (cfg.normalize_advantages && n > 1) {
        const double mean = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (double a : batch.advantages) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (double& a : batch.advantages) a = (a - mean) / (sd + 1e-8);
      }
      const PpoCoefficients coef{cfg.clip_epsilon, cfg.clip, cfg.value_clip, cfg.value_coef, cfg.entropy_coef};
      std::vector<std::size_t> order(n);
      const std::size_t mb = std::min<std::size_t>(n, static_cast<std::size_t>(cfg.minibatch_size));
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        for (std::size_t start = 0; start < n; start += mb) {
          const std::size_t len = std::min(mb, n - start);
          const OnPolicyBatch part = subset(batch, std::span(order).subspan(start, len));
          std::fill(grad.begin(), grad.end(), 0.0);
          last = ppo_loss(net, head, part, coef, grad);
          band_hits += last.ratio_in_band;
          band_total += static_cast<std::int64_t>(len);
          nn::clip_grad_norm(grad, cfg.max_grad_norm);
          opt->step(net.params(), grad);
          ++report.updates;
          detail::divergence_guard(cfg, net, last.mean_abs_logit, last.total, report.updates);
        }
      }
    }

    const bool final = report.steps >= cfg.total_steps;
    if (final || (next_eval > 0 && report.steps >= next_eval)) {
      CurvePoint p;
      p.step = report.steps;
      p.policy_loss = last.policy;
      p.value_loss = last.value;
      p.entropy = last.entropy;
      p.mean_rally_reward = pool.take_mean_rally_reward();
      detail::record_point(cfg, evaluator, net, p, report);
      while (next_eval > 0 && next_eval <= report.steps) next_eval += cfg.eval_every;
    }
  }
  report.rallies = pool.rallies();
  if (ppo && band_total > 0) report.ratio_in_band = static_cast<double>(band_hits) / static_cast<double>(band_total);

  auto policy = detail::snapshot(net, cfg.head);
  Json meta{{"algorithm", to_string(cfg.algorithm)}, {"config_hash", report.config_hash}, {"steps", report.steps}};
  policy->set_metadata(meta);
  return TrainResult{policy, std::move(report)};
}

}  // namespace

TrainResult train_a2c(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator) {
  TrainConfig c = cfg;
  c.algorithm = Algorithm::A2C;
  return train_on_policy(env_cfg, c, evaluator);
}

TrainResult train_ppo(const EnvConfig& env_cfg, const TrainConfig& cfg, const Evaluator& evaluator) {
  TrainConfig c = cfg;
  c.algorithm = Algorithm::PPO;
  return train_on_policy(env_cfg, c, evaluator);
}

}  // namespace shuttle
