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

#include "shuttle/env.hpp"
#include "shuttle/error.hpp"
#include "shuttle/eval.hpp"

using namespace shuttle;

namespace {

EnvConfig constant_env(double ps, double pr, ScoreRule rule = ScoreRule::game_to_21()) {
  EnvConfig c = EnvConfig::symmetric(constant_model(ps), constant_model(pr));
  c.opponent = uniform_random_policy();
  c.score_rule = rule;
  return c;
}

}  // namespace

TEST(Env, ResetObservation) {
  Env env(constant_env(0.9, 0.5));
  const Observation o = env.reset(3);
  for (std::size_t i = 0; i < 92; ++i) EXPECT_EQ(o.features[i], 0.0);
  EXPECT_EQ(o.score_self, 0);
  EXPECT_EQ(o.score_opp, 0);
  EXPECT_TRUE(o.serving);
  EXPECT_TRUE(env.rally_events().empty());
}

TEST(Env, CertainWinner) {
  Env env(constant_env(1.0, 0.0));
  env.reset(1);
  for (int i = 1; i <= 21; ++i) {
    const StepResult r = env.step(decode_action(i));
    EXPECT_TRUE(r.rally_done);
    EXPECT_EQ(r.reward, 1.0);
    EXPECT_EQ(r.info.score.of(PlayerId::P0), i);
    EXPECT_FALSE(r.info.opponent_event);
  }
  EXPECT_TRUE(env.game_done());
  EXPECT_THROW(env.step(decode_action(0)), StateError);
}

TEST(Env, CertainFault) {
  Env env(constant_env(0.0, 0.5));
  env.reset(1);
  const StepResult r = env.step(decode_action(7));
  EXPECT_TRUE(r.rally_done);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_EQ(r.info.exec_result, ExecResult::Fault);
  EXPECT_FALSE(r.info.opponent_event);
  EXPECT_FALSE(r.info.defense_result);
}

TEST(Env, TwoStageFrequencies) {
  // One agent shot per trial: fault / winner / continue.
  EnvConfig cfg = constant_env(0.9, 0.5);
  Env env(cfg);
  env.reset(11);
  const int n = 100000;
  int fault = 0, winner = 0, cont = 0;
  for (int i = 0; i < n; ++i) {
    env.reset_two_agent();
    const StepResult r = env.step_two_agent(decode_action(i % kNumActions));
    if (r.info.exec_result == ExecResult::Fault) {
      ++fault;
    } else if (r.info.defense_result == DefenseResult::Missed) {
      ++winner;
    } else {
      ++cont;
    }
  }
  EXPECT_NEAR(fault / double(n), 0.10, 0.005);
  EXPECT_NEAR(winner / double(n), 0.45, 0.005);
  EXPECT_NEAR(cont / double(n), 0.45, 0.005);
}

TEST(Env, SparseRewardAndBookkeeping) {
  Env env(constant_env(0.8, 0.7));
  Rng agent(4);
  env.reset(4);
  int rallies = 0;
  for (int g = 0; rallies < 10000; ++g) {
    if (env.game_done()) env.reset(static_cast<std::uint64_t>(g));
    while (!env.game_done() && rallies < 10000) {
      const StepResult r = env.step(decode_action(static_cast<int>(agent.below(kNumActions))));
      if (r.rally_done) {
        EXPECT_NE(r.reward, 0.0);
        ++rallies;
      } else {
        EXPECT_EQ(r.reward, 0.0);
      }
      EXPECT_EQ(r.info.score.rallies_played(), static_cast<int>(env.rallies().size()));
    }
    const auto& rs = env.rallies();
    for (std::size_t i = 1; i < rs.size(); ++i) EXPECT_EQ(rs[i].server, rs[i - 1].winner);
  }
}

TEST(Env, DeterministicUnderSeed) {
  auto run = [](std::uint64_t seed) {
    Env env(constant_env(0.85, 0.6));
    env.reset(seed);
    std::vector<Json> out;
    for (int i = 0; i < 300 && !env.game_done(); ++i) {
      const StepResult r = env.step(decode_action((i * 31) % kNumActions));
      out.push_back(Json{{"r", r.reward}, {"obs", r.observation.features}, {"score", r.info.score}});
    }
    out.push_back(Json(env.rallies()));
    return Json(out).dump();
  };
  EXPECT_EQ(run(5), run(5));
  EXPECT_NE(run(5), run(6));
}

TEST(Env, SingleAgentMatchesTwoAgent) {
  const auto data = synth_generate(ground_truth_preset("balanced"), 2000, 1);
  auto nam = std::make_shared<const NextActionModel>(fit_next_action(data));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EnvConfig cfg = EnvConfig::symmetric(std::make_shared<SuccessModel>(fit_success(data)),
                                         std::make_shared<ReturnModel>(fit_return(data)));
    cfg.opponent = bc_policy(nam, PlayerId::P1);
    cfg.initial_server = seed % 2 ? PlayerId::P1 : PlayerId::P0;
    cfg.score_rule = ScoreRule::first_to(5);

    Rng agent_a(seed + 1000);
    Env single(cfg);
    single.reset(seed);
    while (!single.game_done()) single.step(decode_action(static_cast<int>(agent_a.below(kNumActions))));

    Rng agent_b(seed + 1000);
    Env paired(cfg);
    paired.reset_two_agent(seed);
    while (!paired.game_done()) {
      int a;
      if (paired.to_act() == PlayerId::P0) {
        a = static_cast<int>(agent_b.below(kNumActions));
      } else {
        const Observation o = paired.observation_for(PlayerId::P1);
        a = cfg.opponent->act_index(PolicyInput{o, paired.context(), PlayerId::P1}, paired.rng());
      }
      paired.step_two_agent(decode_action(a));
    }
    ASSERT_EQ(single.rallies(), paired.rallies()) << "seed " << seed;
    EXPECT_EQ(single.score(), paired.score());
  }
}

TEST(Env, TwoAgentRewardPerspective) {
  EnvConfig cfg = constant_env(0.0, 0.5);
  Env env(cfg);
  env.reset_two_agent(2);
  const StepResult r = env.step_two_agent(decode_action(0));
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_EQ(r.info.score.of(PlayerId::P1), 1);
  EXPECT_EQ(env.to_act(), PlayerId::P1);
  EXPECT_TRUE(r.observation.serving);
}

TEST(Env, NonTerminatingRallyHitsCap) {
  EnvConfig cfg = constant_env(1.0, 1.0);
  Env env(cfg);
  env.reset_two_agent(1);
  for (int i = 0; i < kMaxRallyShots; ++i) {
    const StepResult r = env.step_two_agent(decode_action(i % kNumActions));
    ASSERT_FALSE(r.rally_done);
  }
  EXPECT_THROW(env.step_two_agent(decode_action(0)), StateError);
  EXPECT_THROW(play_game(UniformRandomPolicy{}, UniformRandomPolicy{}, cfg, 1), StateError);
}

TEST(Env, OpponentInfallibleNeverFaults) {
  EnvConfig cfg = constant_env(0.5, 0.9);
  cfg.opponent_infallible = true;
  Env env(cfg);
  env.reset(1);
  for (int i = 0; i < 2000 && !env.game_done(); ++i) {
    const StepResult r = env.step(decode_action(i % kNumActions));
    if (r.info.opponent_event) EXPECT_EQ(r.info.opponent_event->exec_result, ExecResult::Valid);
  }
}

TEST(Env, Validation) {
  EnvConfig cfg = constant_env(0.5, 0.5);
  cfg.reward_loss = 0.0;
  EXPECT_THROW(Env{cfg}, ValidationError);
  EnvConfig no_opp = constant_env(0.5, 0.5);
  no_opp.opponent = nullptr;
  Env env(no_opp);
  EXPECT_THROW(env.reset(), ValidationError);
  env.reset_two_agent();
  EXPECT_THROW(env.step(decode_action(0)), StateError);
}

TEST(PlayGame, FirstToOneIsOneRally) {
  const GameRecord g = play_game(UniformRandomPolicy{}, UniformRandomPolicy{}, constant_env(0.8, 0.6, ScoreRule::first_to(1)), 3);
  EXPECT_EQ(g.rallies.size(), 1u);
  EXPECT_EQ(g.winner, g.rallies[0].winner);
  for (const auto& r : g.rallies) EXPECT_TRUE(validate_rally(r).empty());
}

TEST(PlayGame, SymmetricModelsAreFair) {
  EnvConfig cfg = constant_env(0.85, 0.6);
  UniformRandomPolicy u;
  int p0 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    cfg.initial_server = i % 2 == 0 ? PlayerId::P0 : PlayerId::P1;
    p0 += play_game(u, u, cfg, mix_seed(77, static_cast<std::uint64_t>(i))).winner == PlayerId::P0;
  }
  EXPECT_GE(p0 / double(n), 0.48);
  EXPECT_LE(p0 / double(n), 0.52);
}

TEST(PlayGame, RecordIsValidRallyLog) {
  const GameRecord g = play_game(UniformRandomPolicy{}, UniformRandomPolicy{}, constant_env(0.8, 0.6), 9);
  const std::string text = format_rally_log(g.rallies);
  EXPECT_EQ(parse_rally_log(text), g.rallies);
  EXPECT_EQ(g.final_score.rallies_played(), static_cast<int>(g.rallies.size()));
  EXPECT_TRUE(g.final_score.game_over);
}
