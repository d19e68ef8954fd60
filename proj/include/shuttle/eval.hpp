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

// Match batches with normal-approximation confidence intervals, the exact
// two-state rally oracle, top-k tables and shot-distribution analytics.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shuttle/env.hpp"
#include "shuttle/models.hpp"

namespace shuttle {

struct WinRateReport {
  int n_games = 0;
  int wins = 0;
  double win_rate = 0.0;
  double ci_halfwidth = 0.0;  // 1.96 * sqrt(p (1 - p) / n)
  std::vector<std::uint64_t> game_seeds;
  std::string fingerprint;
  std::string score_rule;
  int best_of = 1;
};

void to_json(Json& j, const WinRateReport& r);

double ci_halfwidth(double p, int n);

// One match = best_of games (winner of a game serves first in the next).
// Returns the winner.
PlayerId play_match(const Policy& a, const Policy& b, const EnvConfig& cfg, std::uint64_t seed,
                    int best_of = 1);

// n matches of policy_a (seat P0) against policy_b (seat P1); per-match
// seeds are mix_seed(seed, i). cfg.description feeds the fingerprint.
WinRateReport run_matches(const Policy& a, const Policy& b, const EnvConfig& cfg, int n,
                          std::uint64_t seed, int best_of = 1);

// Probability that A wins a rally in which A hits first, for constant
// per-player execution (p_s) and return (p_r) probabilities. Solves
//   x = p_s_a (1 - p_r_b) + p_s_a p_r_b y
//   y = (1 - p_s_b) + p_s_b p_r_a x
// where x (y) is A's win probability with A (B) to hit.
double analytic_rally_win_prob(double p_s_a, double p_r_a, double p_s_b, double p_r_b);

struct ShotHistogram {
  std::array<std::array<double, kNumZones>, kNumShotTypes> freq{};
  std::int64_t shots = 0;
};

void to_json(Json& j, const ShotHistogram& h);

// Marginal (shot, zone) frequencies of the agent's actions over n_rallies
// rallies in single-agent mode (cfg must carry the opponent).
ShotHistogram shot_distribution(const PolicyHandle& policy, EnvConfig cfg, int n_rallies,
                                std::uint64_t seed);

struct TopkTable {
  std::vector<int> ks;
  std::vector<Projection> projections;
  // values[player][projection][k-index]
  std::array<std::vector<std::vector<double>>, 2> values;

  std::string to_text() const;
};

void to_json(Json& j, const TopkTable& t);

TopkTable topk_report(const DistributionFn& dist, const std::vector<RallyRecord>& test,
                      const std::vector<int>& ks, const std::vector<Projection>& projections);
TopkTable topk_report(const NextActionModel& m, const std::vector<RallyRecord>& test,
                      const std::vector<int>& ks, const std::vector<Projection>& projections);

}  // namespace shuttle
