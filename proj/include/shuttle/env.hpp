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

// Rally environment. Each shot is resolved in two stages: the hitter's
// execution (success model, hitter's context), then the defender's return
// (return model, defender's context facing the shot). Rewards are sparse:
// nonzero only on the step that ends a rally.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shuttle/dataset.hpp"
#include "shuttle/outcome_model.hpp"
#include "shuttle/policy.hpp"
#include "shuttle/rng.hpp"

namespace shuttle {

inline constexpr int kMaxRallyShots = 10000;

struct EnvConfig {
  std::array<OutcomeModelPtr, 2> success;  // indexed by hitter
  std::array<OutcomeModelPtr, 2> ret;      // indexed by defender
  PolicyHandle opponent;                  // single-agent mode only
  PlayerId agent_seat = PlayerId::P0;
  PlayerId initial_server = PlayerId::P0;
  ObservationOptions observation;
  double reward_win = 1.0;
  double reward_loss = -1.0;
  ScoreRule score_rule;
  // Opponent's shots never fault (ablation of the symmetric reply).
  bool opponent_infallible = false;
  std::uint64_t seed = 0;
  std::string match_id = "env";
  // Identifies the models behind success/ret in reports and fingerprints.
  Json description = Json::object();

  void validate(bool single_agent) const;

  static EnvConfig symmetric(OutcomeModelPtr success, OutcomeModelPtr ret) {
    EnvConfig c;
    c.success = {success, success};
    c.ret = {ret, ret};
    return c;
  }
};

struct StepInfo {
  ExecResult exec_result = ExecResult::Valid;
  std::optional<DefenseResult> defense_result;
  std::optional<RallyEvent> opponent_event;
  ScoreState score;
  // Rallies decided by the opponent's serve before the agent could act.
  std::vector<RallyRecord> auto_rallies;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool rally_done = false;
  bool game_done = false;
  StepInfo info;
};

class Env {
 public:
  explicit Env(EnvConfig cfg);

  // Score 0-0, empty rally. In single-agent mode, if the opponent serves
  // first its serve is resolved before the agent's first observation.
  Observation reset(std::optional<std::uint64_t> seed = std::nullopt);
  // Two-agent reset: nothing is auto-resolved; returns the server's view.
  Observation reset_two_agent(std::optional<std::uint64_t> seed = std::nullopt);

  // Agent's shot plus the opponent's reply (if the rally continues).
  StepResult step(const Action& a);
  // One shot by the player on turn; observation is for the next player to
  // act, reward for the player who just acted.
  StepResult step_two_agent(const Action& a);

  PlayerId to_act() const { return to_act_; }
  const ScoreState& score() const { return score_; }
  bool game_done() const { return score_.game_over; }
  std::span<const RallyEvent> rally_events() const { return events_; }
  ContextKey context() const { return context_of(events_); }
  Observation observation_for(PlayerId viewer) const;
  const std::vector<RallyRecord>& rallies() const { return rallies_; }
  const EnvConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }

 private:
  RallyEvent resolve(PlayerId hitter, const Action& a);
  void finish_rally(const RallyEvent& last);
  PlayerId opponent_seat() const { return opponent(cfg_.agent_seat); }
  int opponent_act();
  void pre_resolve_opponent_serves(std::vector<RallyRecord>* auto_rallies);
  void start_game(std::optional<std::uint64_t> seed);

  EnvConfig cfg_;
  Rng rng_;
  ScoreState score_;
  std::vector<RallyEvent> events_;
  std::vector<RallyRecord> rallies_;
  PlayerId to_act_ = PlayerId::P0;
};

struct GameRecord {
  std::vector<RallyRecord> rallies;
  ScoreState final_score;
  PlayerId winner = PlayerId::P0;
};

// policy_a plays P0 and policy_b P1; uses cfg's models and score rule.
GameRecord play_game(const Policy& policy_a, const Policy& policy_b, EnvConfig cfg, std::uint64_t seed);

void to_json(Json& j, const GameRecord& g);

}  // namespace shuttle
