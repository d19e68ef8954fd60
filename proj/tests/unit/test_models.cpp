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
#include <set>

#include "helpers.hpp"
#include "shuttle/error.hpp"
#include "shuttle/models.hpp"

using namespace shuttle;
using shuttle::testing::rally;
using shuttle::testing::shot;

namespace {

RallyRecord one_shot(bool valid, bool returned = false) {
  RallyRecord r;
  r.match_id = "m";
  r.server = PlayerId::P0;
  ShotRecord s = shot(0, PlayerId::P0, 118, !valid, valid && !returned);
  if (valid && returned) {
    // a returned shot cannot end a rally; add the reply as a fault
    r.shots.push_back(s);
    r.shots.push_back(shot(1, PlayerId::P1, 5, true));
    r.winner = PlayerId::P0;
    return r;
  }
  r.shots.push_back(s);
  r.winner = valid ? PlayerId::P0 : PlayerId::P1;
  return r;
}

}  // namespace

TEST(Context, ServeAndIncoming) {
  EXPECT_EQ(context_of({}), ContextKey::serve());
  EXPECT_EQ(ContextKey::serve().index(), 0);
  const Action clear{ShotType::Clear, Zone{2, 1}, HeightBand::High, ExecAttrs{}};
  const std::vector<RallyEvent> events = {{PlayerId::P0, clear, ExecResult::Valid, DefenseResult::Returned}};
  const ContextKey k = context_of(events);
  EXPECT_FALSE(k.serving);
  EXPECT_EQ(k.prev_shot, ShotType::Clear);
  EXPECT_EQ(k.prev_height, HeightBand::High);
  EXPECT_EQ(k.prev_zone_row, 2);

  const std::vector<RallyEvent> longer = {{PlayerId::P1, decode_action(300), ExecResult::Valid, DefenseResult::Returned},
                                          {PlayerId::P0, decode_action(17), ExecResult::Valid, DefenseResult::Returned},
                                          events[0]};
  EXPECT_EQ(context_of(longer), k);
}

TEST(Context, IndexRoundTrip) {
  std::set<int> seen;
  for (int i = 0; i < kNumContexts; ++i) {
    EXPECT_EQ(ContextKey::from_index(i).index(), i);
    EXPECT_EQ(Json(ContextKey::from_index(i)).get<ContextKey>(), ContextKey::from_index(i));
    seen.insert(i);
  }
  EXPECT_EQ(seen.size(), 55u);
  EXPECT_THROW(ContextKey::from_index(55), RangeError);
}

TEST(ReducedKey, DropsColumnKeepsRow) {
  const auto key = [](int zone) {
    return reduced_action_key(Action{ShotType::Smash, Zone::from_index(zone), HeightBand::Low, ExecAttrs{}});
  };
  EXPECT_EQ(key(2), key(0));
  EXPECT_NE(key(0), key(3));
  std::set<int> keys;
  for (int i = 0; i < kNumActions; ++i) keys.insert(reduced_action_key(decode_action(i)));
  EXPECT_EQ(keys.size(), 162u);
  EXPECT_EQ(*keys.rbegin(), 161);
  std::set<int> full;
  for (int i = 0; i < kNumActions; ++i) full.insert(reduced_action_key(decode_action(i), ActionReduction::Full));
  EXPECT_EQ(full.size(), 486u);
}

TEST(FitSuccess, LaplaceExamples) {
  const Action a = decode_action(118);
  const SuccessModel valid = fit_success({one_shot(true)});
  EXPECT_DOUBLE_EQ(p_succ(valid, ContextKey::serve(), a), 2.0 / 3.0);
  const SuccessModel fault = fit_success({one_shot(false)});
  EXPECT_DOUBLE_EQ(p_succ(fault, ContextKey::serve(), a), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(p_succ(fault, ContextKey::serve(), decode_action(0)), 0.5);
  const SuccessModel a2 = fit_success({one_shot(true)}, 2.0);
  EXPECT_DOUBLE_EQ(p_succ(a2, ContextKey::serve(), a), 3.0 / 5.0);
  const SuccessModel empty = fit_success({});
  EXPECT_DOUBLE_EQ(p_succ(empty, ContextKey::serve(), a), 0.5);
  EXPECT_THROW(fit_success({}, 0.0), RangeError);
}

TEST(FitReturn, LaplaceExamples) {
  const Action a = decode_action(118);
  const ContextKey facing = ContextKey::facing(a);
  const ReturnModel missed = fit_return({one_shot(true, false)});
  EXPECT_DOUBLE_EQ(p_ret(missed, facing, a), 1.0 / 3.0);
  const ReturnModel returned = fit_return({one_shot(true, true)});
  EXPECT_DOUBLE_EQ(p_ret(returned, facing, a), 2.0 / 3.0);
  const ReturnModel fault = fit_return({one_shot(false)});
  for (int c = 0; c < kNumContexts; ++c) {
    for (int k = 0; k < fault.keys_per_context(); ++k) EXPECT_EQ(fault.cell(c, k).total, 0);
  }
  EXPECT_DOUBLE_EQ(p_ret(fault, facing, a), 0.5);
}

TEST(FitSuccess, ProbabilitiesStrictlyInside) {
  const auto data = synth_generate(ground_truth_preset("balanced"), 2000, 4);
  const SuccessModel s = fit_success(data);
  const ReturnModel r = fit_return(data);
  for (int c = 0; c < kNumContexts; ++c) {
    for (int k = 0; k < 162; ++k) {
      EXPECT_GT(s.probability(c, k), 0.0);
      EXPECT_LT(s.probability(c, k), 1.0);
      EXPECT_GT(r.probability(c, k), 0.0);
      EXPECT_LT(r.probability(c, k), 1.0);
      EXPECT_LE(s.cell(c, k).success, s.cell(c, k).total);
    }
  }
}

TEST(Fit, OrderInvariant) {
  auto data = synth_generate(ground_truth_preset("balanced"), 1500, 6);
  const SuccessModel s1 = fit_success(data);
  const ReturnModel r1 = fit_return(data);
  const NextActionModel n1 = fit_next_action(data);
  std::reverse(data.begin(), data.end());
  std::rotate(data.begin(), data.begin() + 100, data.end());
  EXPECT_TRUE(fit_success(data) == s1);
  EXPECT_TRUE(fit_return(data) == r1);
  EXPECT_TRUE(fit_next_action(data) == n1);
}

TEST(NextAction, LaplaceOverAllActions) {
  const NextActionModel m = fit_next_action({one_shot(true)});
  const auto d = m.distribution(PlayerId::P0, ContextKey::serve());
  EXPECT_DOUBLE_EQ(d[118], 2.0 / 487.0);
  EXPECT_DOUBLE_EQ(d[0], 1.0 / 487.0);
  const auto unseen = m.distribution(PlayerId::P1, ContextKey::serve());
  for (double p : unseen) EXPECT_DOUBLE_EQ(p, 1.0 / 486.0);
}

TEST(NextAction, DistributionsNormalized) {
  const auto data = synth_generate(ground_truth_preset("attacker-favored"), 3000, 2);
  const NextActionModel m = fit_next_action(data);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = m.distribution(static_cast<PlayerId>(rng.below(2)), ContextKey::from_index(static_cast<int>(rng.below(55))));
    double sum = 0.0;
    for (double p : d) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(NextAction, SamplingUnseenIsUniform) {
  const NextActionModel m;
  Rng rng(77);
  std::vector<int> counts(kNumActions, 0);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(encode_action(sample_next_action(m, ContextKey::serve(), PlayerId::P0, rng)))];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 486.0, 0.005);
}

TEST(NextAction, SamplingDominantCount) {
  NextActionModel m;
  for (int i = 0; i < 1000; ++i) m.record(PlayerId::P0, ContextKey::serve(), 42);
  const double expected = 1001.0 / (1000.0 + 486.0);
  Rng rng(78);
  int hits = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) hits += encode_action(sample_next_action(m, ContextKey::serve(), PlayerId::P0, rng)) == 42;
  EXPECT_NEAR(static_cast<double>(hits) / n, expected, 0.01);

  Rng r1(5), r2(5);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_next_action(m, ContextKey::serve(), PlayerId::P0, r1),
              sample_next_action(m, ContextKey::serve(), PlayerId::P0, r2));
  }
}

TEST(Topk, MonotoneAndSaturates) {
  const auto cfg = ground_truth_preset("balanced");
  const auto [train, test] = split_rallies(synth_generate(cfg, 4000, 12), 0.25, 1);
  const NextActionModel m = fit_next_action(train);
  for (Projection p : {Projection::StrokeType, Projection::LandingZone, Projection::FullAction}) {
    double prev = 0.0;
    for (int k = 1; k <= label_count(p); k += (p == Projection::FullAction ? 37 : 1)) {
      const double acc = topk_accuracy(m, test, k, p);
      EXPECT_GE(acc, prev);
      prev = acc;
    }
    EXPECT_DOUBLE_EQ(topk_accuracy(m, test, label_count(p), p), 1.0);
  }
  EXPECT_THROW(topk_accuracy(m, {}, 1, Projection::StrokeType), ValidationError);
  EXPECT_THROW(topk_accuracy(m, test, 0, Projection::StrokeType), RangeError);
}

TEST(Topk, TiesBreakTowardLowerLabel) {
  ActionDistribution d;
  d.fill(1.0 / 486.0);
  const auto ranked = rank_labels(d, Projection::StrokeType);
  EXPECT_EQ(ranked, (std::vector<int>{0, 1, 2, 3, 4, 5}));
}

TEST(Topk, GreedyBcAgreesWithFullActionTop1) {
  const auto data = synth_generate(ground_truth_preset("balanced"), 1500, 3);
  const NextActionModel m = fit_next_action(data);
  std::int64_t agree = 0, total = 0;
  for (const auto& r : data) {
    const auto events = r.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto d = m.distribution(events[i].actor, context_of(std::span(events).first(i)));
      agree += std::max_element(d.begin(), d.end()) - d.begin() == encode_action(events[i].action);
      ++total;
    }
  }
  EXPECT_DOUBLE_EQ(static_cast<double>(agree) / static_cast<double>(total),
                   topk_accuracy(m, data, 1, Projection::FullAction));
}

TEST(ModelJson, RoundTripAndSchema) {
  const auto data = synth_generate(ground_truth_preset("balanced"), 800, 10);
  const SuccessModel s = fit_success(data, 0.5);
  const ReturnModel r = fit_return(data, 2.0, ActionReduction::Full);
  const NextActionModel n = fit_next_action(data);
  EXPECT_TRUE(success_model_from_json(success_model_to_json(s)) == s);
  EXPECT_TRUE(return_model_from_json(return_model_to_json(r)) == r);
  EXPECT_TRUE(NextActionModel::from_json(n.to_json()) == n);

  const auto dir = shuttle::testing::temp_dir("models");
  save_json(dir / "s.json", success_model_to_json(s));
  EXPECT_TRUE(success_model_from_json(load_json(dir / "s.json")) == s);

  Json bad = success_model_to_json(s);
  bad["schema_version"] = 99;
  EXPECT_THROW(success_model_from_json(bad), ValidationError);
  EXPECT_THROW(return_model_from_json(success_model_to_json(s)), ValidationError);
}
