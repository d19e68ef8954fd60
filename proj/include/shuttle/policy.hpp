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

// Stochastic policies over the 486-action space and their checkpoints.

#include <filesystem>
#include <memory>
#include <string>

#include "shuttle/context.hpp"
#include "shuttle/models.hpp"
#include "shuttle/nn/action_head.hpp"
#include "shuttle/nn/network.hpp"
#include "shuttle/rng.hpp"

namespace shuttle {

inline constexpr int kPolicySchemaVersion = 1;

struct PolicyInput {
  const Observation& observation;
  ContextKey context;
  PlayerId player;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string kind() const = 0;
  virtual ActionDistribution distribution(const PolicyInput& in) const = 0;
  // Greedy policies take the argmax (lowest index on ties) without touching
  // the rng; stochastic ones draw exactly one uniform.
  virtual int act_index(const PolicyInput& in, Rng& rng) const;
  Action act(const PolicyInput& in, Rng& rng) const { return decode_action(act_index(in, rng)); }

  bool greedy() const { return greedy_; }
  // Free-form provenance shown in checkpoint catalogs (algorithm, config hash).
  const Json& metadata() const { return metadata_; }
  void set_metadata(Json m) { metadata_ = std::move(m); }

  virtual Json to_json() const = 0;

 protected:
  explicit Policy(bool greedy) : greedy_(greedy) {}
  Json header() const;

 private:
  bool greedy_;
  Json metadata_ = Json::object();
};

using PolicyHandle = std::shared_ptr<const Policy>;

int argmax_index(const ActionDistribution& dist);

class UniformRandomPolicy final : public Policy {
 public:
  UniformRandomPolicy() : Policy(false) {}
  std::string kind() const override { return "uniform_random"; }
  ActionDistribution distribution(const PolicyInput&) const override;
  int act_index(const PolicyInput& in, Rng& rng) const override;
  Json to_json() const override;
};

// Plays like one logged player: samples the smoothed next-action
// distribution of `imitated` in the current context, whichever seat it sits in.
class BcPolicy final : public Policy {
 public:
  BcPolicy(std::shared_ptr<const NextActionModel> model, PlayerId imitated, bool greedy = false);
  std::string kind() const override { return "bc"; }
  ActionDistribution distribution(const PolicyInput& in) const override;
  Json to_json() const override;

  const NextActionModel& model() const { return *model_; }
  PlayerId imitated() const { return imitated_; }

 private:
  std::shared_ptr<const NextActionModel> model_;
  PlayerId imitated_;
};

// Actor head 0 of an MLP over observation features.
class MlpPolicy final : public Policy {
 public:
  MlpPolicy(nn::Network net, nn::HeadKind head, bool greedy = false);
  std::string kind() const override { return "mlp_actor"; }
  ActionDistribution distribution(const PolicyInput& in) const override;
  Json to_json() const override;

  const nn::Network& network() const { return net_; }
  nn::HeadKind head_kind() const { return head_.kind(); }
  int obs_dim() const { return net_.input_dim(); }
  int history_window() const { return (net_.input_dim() - 3) / kSlotFeatures; }

 private:
  nn::Network net_;
  nn::ActionHead head_;
};

PolicyHandle uniform_random_policy();
PolicyHandle bc_policy(std::shared_ptr<const NextActionModel> model, PlayerId imitated, bool greedy = false);
PolicyHandle bc_policy(const NextActionModel& model, PlayerId imitated, bool greedy = false);

// Same parameters, other action-selection mode.
PolicyHandle with_greedy(const PolicyHandle& p, bool greedy);

PolicyHandle policy_from_json(const Json& j, std::optional<int> expected_obs_dim = std::nullopt);
void save_policy(const Policy& p, const std::filesystem::path& path);
PolicyHandle load_policy(const std::filesystem::path& path, std::optional<int> expected_obs_dim = std::nullopt);

// FNV-1a over the canonical dump; used for config hashes and fingerprints.
std::string fingerprint(const Json& j);

}  // namespace shuttle
