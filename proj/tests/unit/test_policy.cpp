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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "shuttle/error.hpp"
#include "shuttle/policy.hpp"

using namespace shuttle;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<RallyRecord>& data() {
  static const auto d = synth_generate(ground_truth_preset("balanced"), 3000, 21);
  return d;
}

}  // namespace

TEST(Policy, UniformEmitsEveryLegalIndex) {
  UniformRandomPolicy u;
  Rng rng(1);
  const Observation o = build_observation({}, ScoreState{}, PlayerId::P0);
  std::vector<int> seen(kNumActions, 0);
  for (int i = 0; i < 100000; ++i) {
    const Action a = u.act(PolicyInput{o, ContextKey::serve(), PlayerId::P0}, rng);
    EXPECT_NO_THROW(a.exec.code());
    ++seen[static_cast<std::size_t>(encode_action(a))];
  }
  for (int c : seen) EXPECT_GT(c, 0);
}

TEST(Policy, BcFollowsModelAndGreedyTieBreak) {
  auto m = std::make_shared<const NextActionModel>(fit_next_action(data()));
  const Observation o = build_observation({}, ScoreState{}, PlayerId::P0);
  BcPolicy bc(m, PlayerId::P1);
  EXPECT_EQ(bc.distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0}), m->distribution(PlayerId::P1, ContextKey::serve()));

  // unseen model: uniform, greedy picks index 0 without using the rng
  BcPolicy flat(std::make_shared<const NextActionModel>(), PlayerId::P0, true);
  Rng rng(3);
  const auto before = rng.next_u64();
  Rng rng2(3);
  EXPECT_EQ(flat.act_index(PolicyInput{o, ContextKey::serve(), PlayerId::P0}, rng2), 0);
  EXPECT_EQ(rng2.next_u64(), before);

  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(bc.act_index(PolicyInput{o, ContextKey::serve(), PlayerId::P0}, a),
              bc.act_index(PolicyInput{o, ContextKey::serve(), PlayerId::P0}, b));
  }
}

TEST(Policy, MlpZeroWeightsIsUniform) {
  MlpPolicy p(nn::Network(95, {8}, {486}), nn::HeadKind::Flat);
  const Observation o = build_observation({}, ScoreState{}, PlayerId::P0);
  for (double v : p.distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0})) EXPECT_NEAR(v, 1.0 / 486.0, 1e-15);
  EXPECT_EQ(p.history_window(), 4);
  EXPECT_THROW(MlpPolicy(nn::Network(95, {8}, {21}), nn::HeadKind::Flat), ValidationError);
}

TEST(Checkpoint, SaveLoadSaveIdenticalBytes) {
  const auto dir = shuttle::testing::temp_dir("checkpoint");
  Rng rng(4);
  nn::Network net(95, {8, 8}, {21, 1});
  const std::vector<double> scales = {1.0, 1.0};
  net.init(rng, scales);
  MlpPolicy mlp(net, nn::HeadKind::Factored, true);
  mlp.set_metadata(Json{{"algorithm", "ppo"}, {"config_hash", "abc"}});
  const auto bc = bc_policy(fit_next_action(data()), PlayerId::P0);
  const auto uniform = uniform_random_policy();
  for (const Policy* p : {static_cast<const Policy*>(&mlp), bc.get(), uniform.get()}) {
    save_policy(*p, dir / "a.json");
    const PolicyHandle loaded = load_policy(dir / "a.json");
    save_policy(*loaded, dir / "b.json");
    EXPECT_EQ(read_file(dir / "a.json"), read_file(dir / "b.json")) << p->kind();
    const Observation o = build_observation({}, ScoreState{}, PlayerId::P0);
    EXPECT_EQ(loaded->distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0}),
              p->distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0}));
    EXPECT_EQ(loaded->metadata(), p->metadata());
  }
}

TEST(Checkpoint, Errors) {
  const auto dir = shuttle::testing::temp_dir("checkpoint_err");
  MlpPolicy mlp(nn::Network(95, {4}, {486}), nn::HeadKind::Flat);
  save_policy(mlp, dir / "p.json");
  EXPECT_NO_THROW(load_policy(dir / "p.json", 95));
  EXPECT_THROW(load_policy(dir / "p.json", 49), ValidationError);
  Json j = mlp.to_json();
  j["schema_version"] = 2;
  EXPECT_THROW(policy_from_json(j), ValidationError);
  Json nan = mlp.to_json();
  nan["network"]["params"][0] = nullptr;
  EXPECT_THROW(policy_from_json(nan), std::exception);
  EXPECT_THROW(load_policy(dir / "missing.json"), NotFoundError);
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_THROW(load_policy(dir / "junk.json"), ParseError);
}

TEST(Checkpoint, LoadedBcReproducesTopk) {
  const auto dir = shuttle::testing::temp_dir("bc_topk");
  const auto m = fit_next_action(data());
  const auto bc = bc_policy(m, PlayerId::P0);
  save_policy(*bc, dir / "bc.json");
  const auto loaded = std::dynamic_pointer_cast<const BcPolicy>(load_policy(dir / "bc.json"));
  ASSERT_TRUE(loaded);
  EXPECT_EQ(topk_accuracy(loaded->model(), data(), 3, Projection::StrokeType),
            topk_accuracy(m, data(), 3, Projection::StrokeType));
}

TEST(Policy, WithGreedyKeepsParameters) {
  const auto bc = bc_policy(fit_next_action(data()), PlayerId::P1);
  const auto g = with_greedy(bc, true);
  EXPECT_TRUE(g->greedy());
  const Observation o = build_observation({}, ScoreState{}, PlayerId::P0);
  EXPECT_EQ(g->distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0}),
            bc->distribution(PolicyInput{o, ContextKey::serve(), PlayerId::P0}));
  EXPECT_EQ(fingerprint(Json{{"a", 1}}), fingerprint(Json{{"a", 1}}));
  EXPECT_NE(fingerprint(Json{{"a", 1}}), fingerprint(Json{{"a", 2}}));
}
