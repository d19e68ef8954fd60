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

#include "shuttle/nn/action_head.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "shuttle/error.hpp"

namespace shuttle::nn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::array<int, 4> kGroupOffset = {0, 6, 15, 18};
constexpr std::array<int, 4> kGroupSize = {6, 9, 3, 3};

bool legal(ActionMask mask, int i) { return mask.empty() || mask[static_cast<std::size_t>(i)] != 0; }

// log-softmax of x[0..n) restricted to legal entries (mask indexes x directly)
void log_softmax(const double* x, int n, double* out, ActionMask mask) {
  double hi = kNegInf;
  for (int i = 0; i < n; ++i) {
    if (legal(mask, i)) hi = std::max(hi, x[i]);
  }
  if (hi == kNegInf) throw ConstraintError("action mask leaves no legal action");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (legal(mask, i)) sum += std::exp(x[i] - hi);
  }
  const double lse = hi + std::log(sum);
  for (int i = 0; i < n; ++i) out[i] = legal(mask, i) ? x[i] - lse : kNegInf;
}

std::array<int, 4> components(int action) {
  const Action a = decode_action(action);
  return {static_cast<int>(a.shot), a.target.index(), static_cast<int>(a.height), a.exec.code()};
}

void check(std::span<const double> logits, int dim, ActionMask mask, HeadKind kind) {
  if (static_cast<int>(logits.size()) != dim) throw ValidationError("logit vector has the wrong size");
  if (!mask.empty()) {
    if (mask.size() != static_cast<std::size_t>(kNumActions)) throw ValidationError("mask must cover 486 actions");
    if (kind == HeadKind::Factored && std::find(mask.begin(), mask.end(), 0) != mask.end()) {
      throw ConstraintError("factored heads do not support action masks");
    }
  }
}

}  // namespace

std::string_view to_string(HeadKind k) { return k == HeadKind::Flat ? "flat" : "factored"; }

HeadKind parse_head_kind(std::string_view s) {
  if (s == "flat") return HeadKind::Flat;
  if (s == "factored") return HeadKind::Factored;
  throw ParseError("unknown head kind '" + std::string(s) + "'");
}

void ActionHead::log_probs(std::span<const double> logits, std::span<double> out, ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  if (out.size() != static_cast<std::size_t>(kNumActions)) throw ValidationError("output must hold 486 values");
  if (kind_ == HeadKind::Flat) {
    log_softmax(logits.data(), kNumActions, out.data(), mask);
    return;
  }
  std::array<double, 21> group_lp{};
  for (int g = 0; g < 4; ++g) {
    log_softmax(logits.data() + kGroupOffset[g], kGroupSize[g], group_lp.data() + kGroupOffset[g], {});
  }
  for (int i = 0; i < kNumActions; ++i) {
    const auto c = components(i);
    double lp = 0.0;
    for (int g = 0; g < 4; ++g) lp += group_lp[kGroupOffset[g] + c[g]];
    out[i] = lp;
  }
}

double ActionHead::log_prob(std::span<const double> logits, int action, ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  if (kind_ == HeadKind::Flat) {
    std::vector<double> lp(kNumActions);
    log_softmax(logits.data(), kNumActions, lp.data(), mask);
    return lp[action];
  }
  const auto c = components(action);
  double total = 0.0;
  std::array<double, 9> buf{};
  for (int g = 0; g < 4; ++g) {
    log_softmax(logits.data() + kGroupOffset[g], kGroupSize[g], buf.data(), {});
    total += buf[c[g]];
  }
  return total;
}

double ActionHead::entropy(std::span<const double> logits, ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  auto group_entropy = [](const double* x, int n, ActionMask m) {
    std::vector<double> lp(static_cast<std::size_t>(n));
    log_softmax(x, n, lp.data(), m);
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
      if (lp[i] != kNegInf) h -= std::exp(lp[i]) * lp[i];
    }
    return h;
  };
  if (kind_ == HeadKind::Flat) return group_entropy(logits.data(), kNumActions, mask);
  double h = 0.0;
  for (int g = 0; g < 4; ++g) h += group_entropy(logits.data() + kGroupOffset[g], kGroupSize[g], {});
  return h;
}

void ActionHead::add_grad_log_prob(std::span<const double> logits, int action, double coef,
                                   std::span<double> dlogits, ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  auto group = [coef](const double* x, int n, int target, double* d, ActionMask m) {
    std::vector<double> lp(static_cast<std::size_t>(n));
    log_softmax(x, n, lp.data(), m);
    for (int i = 0; i < n; ++i) {
      if (lp[i] == kNegInf) continue;
      d[i] += coef * ((i == target ? 1.0 : 0.0) - std::exp(lp[i]));
    }
  };
  if (kind_ == HeadKind::Flat) {
    group(logits.data(), kNumActions, action, dlogits.data(), mask);
    return;
  }
  const auto c = components(action);
  for (int g = 0; g < 4; ++g) {
    group(logits.data() + kGroupOffset[g], kGroupSize[g], c[g], dlogits.data() + kGroupOffset[g], {});
  }
}

void ActionHead::add_grad_weighted_log_probs(std::span<const double> logits, std::span<const double> weights,
                                             std::span<double> dlogits, ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  if (weights.size() != static_cast<std::size_t>(kNumActions)) throw ValidationError("weights must hold 486 values");
  if (kind_ == HeadKind::Flat) {
    std::vector<double> lp(kNumActions);
    log_softmax(logits.data(), kNumActions, lp.data(), mask);
    double total = 0.0;
    for (int i = 0; i < kNumActions; ++i) {
      if (lp[i] != kNegInf) total += weights[i];
    }
    for (int i = 0; i < kNumActions; ++i) {
      if (lp[i] != kNegInf) dlogits[i] += weights[i] - std::exp(lp[i]) * total;
    }
    return;
  }
  std::array<double, 21> marginal{};
  double total = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    const auto c = components(i);
    for (int g = 0; g < 4; ++g) marginal[kGroupOffset[g] + c[g]] += weights[i];
    total += weights[i];
  }
  std::array<double, 9> lp{};
  for (int g = 0; g < 4; ++g) {
    log_softmax(logits.data() + kGroupOffset[g], kGroupSize[g], lp.data(), {});
    for (int j = 0; j < kGroupSize[g]; ++j) {
      dlogits[kGroupOffset[g] + j] += marginal[kGroupOffset[g] + j] - std::exp(lp[j]) * total;
    }
  }
}

void ActionHead::add_grad_entropy(std::span<const double> logits, double coef, std::span<double> dlogits,
                                  ActionMask mask) const {
  check(logits, logits_dim(), mask, kind_);
  // dH/dz_j = -p_j (log p_j + H)
  auto group = [coef](const double* x, int n, double* d, ActionMask m) {
    std::vector<double> lp(static_cast<std::size_t>(n));
    log_softmax(x, n, lp.data(), m);
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
      if (lp[i] != kNegInf) h -= std::exp(lp[i]) * lp[i];
    }
    for (int i = 0; i < n; ++i) {
      if (lp[i] == kNegInf) continue;
      d[i] += coef * (-std::exp(lp[i]) * (lp[i] + h));
    }
  };
  if (kind_ == HeadKind::Flat) {
    group(logits.data(), kNumActions, dlogits.data(), mask);
    return;
  }
  for (int g = 0; g < 4; ++g) {
    group(logits.data() + kGroupOffset[g], kGroupSize[g], dlogits.data() + kGroupOffset[g], {});
  }
}

}  // namespace shuttle::nn
