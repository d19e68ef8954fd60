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

#include "shuttle/agents.hpp"
#include "shuttle/error.hpp"
#include "shuttle/nn/kernels.hpp"

namespace shuttle {

namespace {

void check_batch(const nn::Network& net, int obs_dim, std::size_t obs_size, int batch) {
  if (batch < 1) throw ValidationError("loss needs a nonempty batch");
  if (obs_dim != net.input_dim() || obs_size != static_cast<std::size_t>(batch) * obs_dim) {
    throw ValidationError("batch observations do not match the network input");
  }
}

void check_grad(const nn::Network& net, std::span<double> grad) {
  if (!grad.empty() && grad.size() != net.num_params()) throw ValidationError("gradient buffer has the wrong size");
}

double mean_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_actor_critic(const nn::Network& net, const nn::ActionHead& head) {
  if (net.num_heads() != 2 || net.head_dims()[0] != head.logits_dim() || net.head_dims()[1] != 1) {
    throw ValidationError("actor-critic network needs heads [actor logits, 1]");
  }
}

}  // namespace

LossTerms a2c_loss(const nn::Network& net, const nn::ActionHead& head, const OnPolicyBatch& batch,
                   const A2cCoefficients& coef, std::span<double> grad) {
  check_actor_critic(net, head);
  const int n = batch.size();
  check_batch(net, batch.obs_dim, batch.obs.size(), n);
  check_grad(net, grad);
  nn::ForwardCache cache;
  nn::forward(net, batch.obs, n, cache);
  const int dims = head.logits_dim();
  std::vector<std::vector<double>> hg(2);
  if (!grad.empty()) {
    hg[0].assign(static_cast<std::size_t>(n) * dims, 0.0);
    hg[1].assign(static_cast<std::size_t>(n), 0.0);
  }
  const double inv = 1.0 / n;
  LossTerms t;
  for (int i = 0; i < n; ++i) {
    const auto logits = cache.head_row(0, i, dims);
    const double v = cache.heads[1][static_cast<std::size_t>(i)];
    const double adv = batch.advantages[static_cast<std::size_t>(i)];
    const double ret = batch.returns[static_cast<std::size_t>(i)];
    const int a = batch.actions[static_cast<std::size_t>(i)];
    t.policy -= head.log_prob(logits, a) * adv * inv;
    t.value += 0.5 * (v - ret) * (v - ret) * inv;
    t.entropy += head.entropy(logits) * inv;
    if (!grad.empty()) {
      std::span<double> row(hg[0].data() + static_cast<std::size_t>(i) * dims, static_cast<std::size_t>(dims));
      head.add_grad_log_prob(logits, a, -adv * inv, row);
      head.add_grad_entropy(logits, -coef.entropy_coef * inv, row);
      hg[1][static_cast<std::size_t>(i)] = coef.value_coef * (v - ret) * inv;
    }
  }
  t.mean_abs_logit = mean_abs(cache.heads[0]);
  t.total = t.policy + coef.value_coef * t.value - coef.entropy_coef * t.entropy;
  if (!grad.empty()) nn::backward(net, cache, hg, grad);
  return t;
}

LossTerms ppo_loss(const nn::Network& net, const nn::ActionHead& head, const OnPolicyBatch& batch,
                   const PpoCoefficients& coef, std::span<double> grad) {
  check_actor_critic(net, head);
  if (!(coef.clip_epsilon > 0.0)) throw RangeError("clip epsilon must be > 0");
  const int n = batch.size();
  check_batch(net, batch.obs_dim, batch.obs.size(), n);
  check_grad(net, grad);
  nn::ForwardCache cache;
  nn::forward(net, batch.obs, n, cache);
  const int dims = head.logits_dim();
  std::vector<std::vector<double>> hg(2);
  if (!grad.empty()) {
    hg[0].assign(static_cast<std::size_t>(n) * dims, 0.0);
    hg[1].assign(static_cast<std::size_t>(n), 0.0);
  }
  const double eps = coef.clip_epsilon;
  const double inv = 1.0 / n;
  LossTerms t;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto logits = cache.head_row(0, i, dims);
    const int a = batch.actions[k];
    const double adv = batch.advantages[k];
    const double ratio = std::exp(head.log_prob(logits, a) - batch.old_log_probs[k]);
    if (ratio >= 1.0 - eps - 0.05 && ratio <= 1.0 + eps + 0.05) ++t.ratio_in_band;

    const double unclipped = ratio * adv;
    double surrogate = unclipped;
    bool live = true;
    if (coef.clip) {
      const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
      if (clipped < unclipped) {
        surrogate = clipped;
        live = false;
      }
    }
    t.policy -= surrogate * inv;

    const double v = cache.heads[1][k];
    const double ret = batch.returns[k];
    double dv = v - ret;
    double vloss = 0.5 * dv * dv;
    if (coef.value_clip > 0.0) {
      const double delta = v - batch.old_values[k];
      const double vc = batch.old_values[k] + std::clamp(delta, -coef.value_clip, coef.value_clip);
      const double lc = 0.5 * (vc - ret) * (vc - ret);
      if (lc > vloss) {
        vloss = lc;
        dv = std::abs(delta) < coef.value_clip ? vc - ret : 0.0;
      }
    }
    t.value += vloss * inv;
    t.entropy += head.entropy(logits) * inv;

    if (!grad.empty()) {
      std::span<double> row(hg[0].data() + k * dims, static_cast<std::size_t>(dims));
      if (live) head.add_grad_log_prob(logits, a, -unclipped * inv, row);
      head.add_grad_entropy(logits, -coef.entropy_coef * inv, row);
      hg[1][k] = coef.value_coef * dv * inv;
    }
  }
  t.mean_abs_logit = mean_abs(cache.heads[0]);
  t.total = t.policy + coef.value_coef * t.value - coef.entropy_coef * t.entropy;
  if (!grad.empty()) nn::backward(net, cache, hg, grad);
  return t;
}

std::vector<double> sac_targets(const nn::Network& actor, const nn::ActionHead& head,
                                const nn::Network& q1_target, const nn::Network& q2_target,
                                const SacBatch& batch, double gamma, double temperature) {
  const int n = batch.size();
  check_batch(actor, batch.obs_dim, batch.next_obs.size(), n);
  nn::ForwardCache ca, c1, c2;
  nn::forward(actor, batch.next_obs, n, ca);
  nn::forward(q1_target, batch.next_obs, n, c1);
  nn::forward(q2_target, batch.next_obs, n, c2);
  const int dims = head.logits_dim();
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<double> lp(kNumActions);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double soft_v = 0.0;
    if (!batch.dones[k]) {
      head.log_probs(ca.head_row(0, i, dims), lp);
      const auto q1 = c1.head_row(0, i, kNumActions);
      const auto q2 = c2.head_row(0, i, kNumActions);
      for (int a = 0; a < kNumActions; ++a) {
        const double p = std::exp(lp[a]);
        if (p > 0.0) soft_v += p * (std::min(q1[a], q2[a]) - temperature * lp[a]);
      }
    }
    y[k] = batch.rewards[k] + (batch.dones[k] ? 0.0 : gamma * soft_v);
  }
  return y;
}

double sac_critic_loss(const nn::Network& q, const SacBatch& batch, std::span<const double> targets,
                       std::span<double> grad) {
  const int n = batch.size();
  check_batch(q, batch.obs_dim, batch.obs.size(), n);
  check_grad(q, grad);
  if (q.num_heads() != 1 || q.head_dims()[0] != kNumActions) throw ValidationError("critic needs one 486-way head");
  if (targets.size() != static_cast<std::size_t>(n)) throw ValidationError("one target per sample required");
  nn::ForwardCache cache;
  nn::forward(q, batch.obs, n, cache);
  std::vector<std::vector<double>> hg(1);
  if (!grad.empty()) hg[0].assign(static_cast<std::size_t>(n) * kNumActions, 0.0);
  const double inv = 1.0 / n;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::size_t at = k * kNumActions + static_cast<std::size_t>(batch.actions[k]);
    const double d = cache.heads[0][at] - targets[k];
    loss += 0.5 * d * d * inv;
    if (!grad.empty()) hg[0][at] = d * inv;
  }
  if (!grad.empty()) nn::backward(q, cache, hg, grad);
  return loss;
}

SacActorTerms sac_actor_loss(const nn::Network& actor, const nn::ActionHead& head, const nn::Network& q1,
                             const nn::Network& q2, std::span<const double> obs, int batch,
                             double temperature, std::span<double> grad) {
  check_batch(actor, actor.input_dim(), obs.size(), batch);
  check_grad(actor, grad);
  if (actor.num_heads() < 1 || actor.head_dims()[0] != head.logits_dim()) {
    throw ValidationError("actor head 0 does not match the action head");
  }
  nn::ForwardCache ca, c1, c2;
  nn::forward(actor, obs, batch, ca);
  nn::forward(q1, obs, batch, c1);
  nn::forward(q2, obs, batch, c2);
  const int dims = head.logits_dim();
  std::vector<std::vector<double>> hg(actor.num_heads());
  if (!grad.empty()) hg[0].assign(static_cast<std::size_t>(batch) * dims, 0.0);
  std::vector<double> lp(kNumActions);
  std::vector<double> w(kNumActions);
  const double inv = 1.0 / batch;
  SacActorTerms t;
  for (int i = 0; i < batch; ++i) {
    const auto logits = ca.head_row(0, i, dims);
    head.log_probs(logits, lp);
    const auto qa = c1.head_row(0, i, kNumActions);
    const auto qb = c2.head_row(0, i, kNumActions);
    for (int a = 0; a < kNumActions; ++a) {
      const double p = std::exp(lp[a]);
      if (p == 0.0) {
        w[a] = 0.0;
        continue;
      }
      const double f = temperature * lp[a] - std::min(qa[a], qb[a]);
      t.loss += p * f * inv;
      t.entropy -= p * lp[a] * inv;
      // d/d(log pi_a) of pi_a (T log pi_a - Q_a)
      w[a] = p * (f + temperature) * inv;
    }
    if (!grad.empty()) {
      head.add_grad_weighted_log_probs(
          logits, w, std::span<double>(hg[0].data() + static_cast<std::size_t>(i) * dims, static_cast<std::size_t>(dims)));
    }
  }
  t.mean_abs_logit = mean_abs(ca.heads[0]);
  if (!grad.empty()) nn::backward(actor, ca, hg, grad);
  return t;
}

double sac_temperature_loss(double log_temperature, double mean_entropy, double target_entropy, double* grad) {
  const double value = std::exp(log_temperature) * (mean_entropy - target_entropy);
  if (grad) *grad = value;
  return value;
}

void polyak_update(const nn::Network& online, nn::Network& target, double tau) {
  if (!online.same_shape(target)) throw ValidationError("polyak update needs networks of the same shape");
  if (!(tau >= 0.0 && tau <= 1.0)) throw RangeError("tau must lie in [0, 1]");
  auto src = online.params();
  auto dst = target.params();
  nn::kernels::active().lerp(tau, src.data(), dst.data(), dst.size());
}

}  // namespace shuttle
