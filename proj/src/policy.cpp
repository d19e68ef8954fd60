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

#include "shuttle/policy.hpp"

#include <cstdio>
#include <fstream>

#include "shuttle/error.hpp"

namespace shuttle {

int argmax_index(const ActionDistribution& dist) {
  int best = 0;
  for (int i = 1; i < kNumActions; ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return best;
}

int Policy::act_index(const PolicyInput& in, Rng& rng) const {
  const auto dist = distribution(in);
  if (greedy_) return argmax_index(dist);
  return static_cast<int>(rng.categorical(dist));
}

Json Policy::header() const {
  return Json{{"schema_version", kPolicySchemaVersion},
              {"kind", kind()},
              {"greedy", greedy_},
              {"metadata", metadata_}};
}

ActionDistribution UniformRandomPolicy::distribution(const PolicyInput&) const {
  ActionDistribution d;
  d.fill(1.0 / kNumActions);
  return d;
}

int UniformRandomPolicy::act_index(const PolicyInput&, Rng& rng) const {
  return static_cast<int>(rng.below(kNumActions));
}

Json UniformRandomPolicy::to_json() const { return header(); }

BcPolicy::BcPolicy(std::shared_ptr<const NextActionModel> model, PlayerId imitated, bool greedy)
    : Policy(greedy), model_(std::move(model)), imitated_(imitated) {
  if (!model_) throw ValidationError("bc policy needs a fitted next-action model");
}

ActionDistribution BcPolicy::distribution(const PolicyInput& in) const {
  return model_->distribution(imitated_, in.context);
}

Json BcPolicy::to_json() const {
  Json j = header();
  j["player"] = imitated_;
  j["model"] = model_->to_json();
  return j;
}

MlpPolicy::MlpPolicy(nn::Network net, nn::HeadKind head, bool greedy)
    : Policy(greedy), net_(std::move(net)), head_(head) {
  if (net_.num_heads() < 1 || net_.head_dims()[0] != head_.logits_dim()) {
    throw ValidationError("network head 0 does not match the actor head size");
  }
  if ((net_.input_dim() - 3) % kSlotFeatures != 0 || net_.input_dim() < kSlotFeatures + 3) {
    throw ValidationError("network input_dim is not a valid observation dimension");
  }
}

ActionDistribution MlpPolicy::distribution(const PolicyInput& in) const {
  nn::ForwardCache cache;
  nn::forward(net_, in.observation.features, 1, cache);
  ActionDistribution lp;
  head_.log_probs(cache.head_row(0, 0, head_.logits_dim()), lp);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

Json MlpPolicy::to_json() const {
  Json j = header();
  j["obs_dim"] = net_.input_dim();
  j["head"] = nn::to_string(head_.kind());
  j["network"] = net_.to_json();
  return j;
}

PolicyHandle uniform_random_policy() { return std::make_shared<UniformRandomPolicy>(); }

PolicyHandle bc_policy(std::shared_ptr<const NextActionModel> model, PlayerId imitated, bool greedy) {
  return std::make_shared<BcPolicy>(std::move(model), imitated, greedy);
}

PolicyHandle bc_policy(const NextActionModel& model, PlayerId imitated, bool greedy) {
  return bc_policy(std::make_shared<const NextActionModel>(model), imitated, greedy);
}

PolicyHandle with_greedy(const PolicyHandle& p, bool greedy) {
  std::shared_ptr<Policy> out;
  if (auto* bc = dynamic_cast<const BcPolicy*>(p.get())) {
    out = std::make_shared<BcPolicy>(std::make_shared<const NextActionModel>(bc->model()), bc->imitated(), greedy);
  } else if (auto* mlp = dynamic_cast<const MlpPolicy*>(p.get())) {
    out = std::make_shared<MlpPolicy>(mlp->network(), mlp->head_kind(), greedy);
  } else {
    return p;
  }
  out->set_metadata(p->metadata());
  return out;
}

PolicyHandle policy_from_json(const Json& j, std::optional<int> expected_obs_dim) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kPolicySchemaVersion) {
      throw ValidationError("unsupported policy schema_version " + std::to_string(version));
    }
    const auto kind = j.at("kind").get<std::string>();
    const bool greedy = j.value("greedy", false);
    std::shared_ptr<Policy> p;
    if (kind == "uniform_random") {
      p = std::make_shared<UniformRandomPolicy>();
    } else if (kind == "bc") {
      p = std::make_shared<BcPolicy>(
          std::make_shared<const NextActionModel>(NextActionModel::from_json(j.at("model"))),
          j.at("player").get<PlayerId>(), greedy);
    } else if (kind == "mlp_actor") {
      const int obs_dim = j.at("obs_dim").get<int>();
      if (expected_obs_dim && obs_dim != *expected_obs_dim) {
        throw ValidationError("policy obs_dim " + std::to_string(obs_dim) + " does not match environment obs_dim " +
                              std::to_string(*expected_obs_dim));
      }
      auto net = nn::Network::from_json(j.at("network"));
      if (net.input_dim() != obs_dim) throw ValidationError("policy obs_dim disagrees with its network");
      p = std::make_shared<MlpPolicy>(std::move(net), nn::parse_head_kind(j.at("head").get<std::string>()), greedy);
    } else {
      throw ValidationError("unknown policy kind '" + kind + "'");
    }
    p->set_metadata(j.value("metadata", Json::object()));
    return p;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("policy checkpoint: ") + e.what());
  }
}

void save_policy(const Policy& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << p.to_json().dump() << '\n';
}

PolicyHandle load_policy(const std::filesystem::path& path, std::optional<int> expected_obs_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open policy checkpoint " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return policy_from_json(j, expected_obs_dim);
}

std::string fingerprint(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shuttle
