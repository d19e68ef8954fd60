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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "shuttle/dataset.hpp"
#include "shuttle/error.hpp"

using namespace shuttle;
using shuttle::testing::rally;

TEST(ValidateRally, AcceptsValidRallies) {
  EXPECT_TRUE(validate_rally(rally(10, false)).empty());
  EXPECT_TRUE(validate_rally(rally(1, true)).empty());
  EXPECT_TRUE(validate_rally(rally(3, true)).empty());
}

TEST(ValidateRally, NonTerminalFault) {
  RallyRecord r = rally(5, false);
  r.shots[2].exec_result = ExecResult::Fault;
  r.shots[2].defense_result.reset();
  const auto v = validate_rally(r);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(std::find_if(v.begin(), v.end(),
                         [](const std::string& s) { return s.find("non-terminal fault at shot_index 2") != std::string::npos; }),
            v.end());
}

TEST(ValidateRally, WinnerMismatchAndAlternation) {
  RallyRecord r = rally(4, true);
  r.winner = opponent(r.winner);
  EXPECT_FALSE(validate_rally(r).empty());

  RallyRecord alt = rally(4, false);
  alt.shots[1].actor = PlayerId::P0;
  EXPECT_FALSE(validate_rally(alt).empty());

  RallyRecord gap = rally(4, false);
  gap.shots[3].shot_index = 7;
  EXPECT_FALSE(validate_rally(gap).empty());

  RallyRecord empty = rally(2, false);
  empty.shots.clear();
  EXPECT_FALSE(validate_rally(empty).empty());
}

TEST(RallyLog, EmptyFileGivesEmptyList) {
  const auto dir = shuttle::testing::temp_dir("empty_log");
  std::ofstream(dir / "empty.jsonl").close();
  EXPECT_TRUE(load_rally_log(dir / "empty.jsonl").empty());
}

TEST(RallyLog, ThreeShotFaultRally) {
  const RallyRecord r = rally(3, true);
  const auto loaded = parse_rally_log(Json(r).dump() + "\n");
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].winner, opponent(loaded[0].shots.back().actor));
  EXPECT_EQ(loaded[0], r);
}

TEST(RallyLog, ErrorsNameLineAndRally) {
  RallyRecord bad = rally(3, false, 42);
  bad.shots[1].actor = PlayerId::P0;
  const std::string text = Json(rally(2, true)).dump() + "\n" + Json(bad).dump() + "\n";
  try {
    parse_rally_log(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
  EXPECT_THROW(parse_rally_log("{\"match_id\": \n"), ParseError);
  EXPECT_THROW(load_rally_log("/nonexistent/rallies.jsonl"), NotFoundError);
}

TEST(RallyLog, SaveLoadRoundTrip) {
  const auto records = synth_generate(ground_truth_preset("balanced"), 300, 3);
  const auto dir = shuttle::testing::temp_dir("roundtrip");
  save_rally_log(dir / "log.jsonl", records);
  const auto loaded = load_rally_log(dir / "log.jsonl");
  EXPECT_EQ(loaded, records);
  EXPECT_EQ(format_rally_log(loaded), format_rally_log(records));
}

TEST(Split, EightTwoStable) {
  std::vector<RallyRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(rally(1 + i % 4, i % 2 == 0, i));
  const auto [train, test] = split_rallies(rs, 0.2, 9);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(test.size(), 2u);
  const auto again = split_rallies(rs, 0.2, 9);
  EXPECT_EQ(again.first, train);
  EXPECT_EQ(again.second, test);

  std::vector<int> ids;
  for (const auto& r : train) ids.push_back(r.rally_id);
  for (const auto& r : test) ids.push_back(r.rally_id);
  std::sort(ids.begin(), ids.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(ids[static_cast<std::size_t>(i)], i);
}

TEST(Split, TwoRalliesHalf) {
  const std::vector<RallyRecord> rs = {rally(1, true, 0), rally(2, true, 1)};
  const auto [train, test] = split_rallies(rs, 0.5, 1);
  EXPECT_EQ(train.size(), 1u);
  EXPECT_EQ(test.size(), 1u);
  EXPECT_THROW(split_rallies({rally(1, true)}, 0.5, 1), ValidationError);
  EXPECT_THROW(split_rallies(rs, 0.0, 1), RangeError);
  EXPECT_THROW(split_rallies(rs, 1.0, 1), RangeError);
}

TEST(Summary, EmptyAndSingle) {
  const DatasetSummary e = summary_stats({});
  EXPECT_EQ(e.rallies, 0);
  EXPECT_EQ(e.shots, 0);
  EXPECT_EQ(e.mean_rally_length, 0.0);
  const DatasetSummary s = summary_stats({rally(3, true)});
  EXPECT_EQ(s.rallies, 1);
  EXPECT_EQ(s.shots, 3);
  EXPECT_EQ(s.rally_length_hist.at(3), 1);
  EXPECT_EQ(s.players[0].faults, 1);  // shot 2 is P0's
}

TEST(Summary, ShotFrequenciesMatchGenerator) {
  const auto cfg = ground_truth_preset("balanced");
  // ~100k shots each from two independent streams
  const auto a = summary_stats(synth_generate(cfg, 40000, 1));
  const auto b = summary_stats(synth_generate(cfg, 160000, 2));
  EXPECT_GT(a.shots, 90000);
  for (int s = 0; s < kNumShotTypes; ++s) {
    EXPECT_NEAR(a.shot_type_freq[static_cast<std::size_t>(s)], b.shot_type_freq[static_cast<std::size_t>(s)], 0.01);
  }
}

TEST(Generator, SuccessZeroGivesReceiverWins) {
  GroundTruthConfig cfg = ground_truth_preset("balanced");
  cfg.success_override = 0.0;
  for (const auto& r : synth_generate(cfg, 500, 4)) {
    ASSERT_EQ(r.shots.size(), 1u);
    EXPECT_EQ(r.winner, opponent(r.server));
  }
}

TEST(Generator, SuccessOneReturnZeroGivesServerWins) {
  GroundTruthConfig cfg = ground_truth_preset("balanced");
  cfg.success_override = 1.0;
  cfg.return_override = 0.0;
  for (const auto& r : synth_generate(cfg, 500, 4)) {
    ASSERT_EQ(r.shots.size(), 1u);
    EXPECT_EQ(r.winner, r.server);
  }
  cfg.return_override = 1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Generator, GeometricMeanLength) {
  GroundTruthConfig cfg = ground_truth_preset("balanced");
  cfg.success_override = 0.9;
  cfg.return_override = 0.5;
  const auto s = summary_stats(synth_generate(cfg, 100000, 5));
  EXPECT_NEAR(s.mean_rally_length, 1.0 / (1.0 - 0.45), 0.05);
}

TEST(Generator, RandomConfigsPassValidation) {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const GroundTruthConfig cfg = shuttle::testing::random_ground_truth(rng);
    for (const auto& r : synth_generate(cfg, 5, cfg.seed)) {
      const auto v = validate_rally(r);
      ASSERT_TRUE(v.empty()) << v.front();
    }
  }
}

TEST(Generator, ProbabilitiesClamped) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    GroundTruthConfig cfg = shuttle::testing::random_ground_truth(rng);
    for (auto& p : cfg.players) {
      for (double& v : p.succ_shot) v *= 10;
      for (double& v : p.ret_shot) v *= 10;
    }
    for (int a = 0; a < kNumActions; a += 5) {
      const double ps = cfg.p_success(PlayerId::P0, ContextKey::serve(), decode_action(a));
      const double pr = cfg.p_return(PlayerId::P1, decode_action(a));
      EXPECT_GE(ps, GroundTruthConfig::kClampLo);
      EXPECT_LE(ps, GroundTruthConfig::kClampHi);
      EXPECT_GE(pr, GroundTruthConfig::kClampLo);
      EXPECT_LE(pr, GroundTruthConfig::kClampHi);
    }
  }
}

TEST(Generator, Deterministic) {
  const auto cfg = ground_truth_preset("attacker-favored");
  EXPECT_EQ(format_rally_log(synth_generate(cfg, 200, 8)), format_rally_log(synth_generate(cfg, 200, 8)));
  const auto a = synth_generate(cfg, 100, 8);
  const auto b = synth_generate(cfg, 100, 9);
  EXPECT_NE(format_rally_log(a), format_rally_log(b));
}

TEST(Generator, ActionDistributionNormalized) {
  const auto cfg = ground_truth_preset("balanced");
  for (int c = 0; c < kNumContexts; ++c) {
    const auto d = cfg.action_distribution(PlayerId::P1, ContextKey::from_index(c));
    double sum = 0.0;
    for (double p : d) {
      EXPECT_GT(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(GroundTruth, PresetsRoundTripThroughJson) {
  for (const auto& name : ground_truth_preset_names()) {
    const auto cfg = ground_truth_preset(name);
    EXPECT_EQ(Json(cfg).get<GroundTruthConfig>(), cfg);
  }
  EXPECT_THROW(ground_truth_preset("nope"), NotFoundError);
}

TEST(GroundTruth, ShippedPresetFilesMatchBuiltins) {
  const std::filesystem::path dir = std::filesystem::path(SHUTTLE_SOURCE_DIR) / "presets";
  for (const auto& name : ground_truth_preset_names()) {
    EXPECT_EQ(load_ground_truth(dir / (name + ".json")), ground_truth_preset(name)) << name;
  }
}
