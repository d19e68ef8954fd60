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

// Rally-log schema, JSON-Lines I/O, validation, splitting and summaries, plus
// the synthetic match generator with logistic ground-truth dynamics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shuttle/context.hpp"
#include "shuttle/outcome_model.hpp"
#include "shuttle/rng.hpp"

namespace shuttle {

struct ShotRecord {
  std::string match_id;
  int rally_id = 0;
  int shot_index = 0;
  PlayerId actor = PlayerId::P0;
  Action action;
  ExecResult exec_result = ExecResult::Valid;
  std::optional<DefenseResult> defense_result;
  std::optional<CourtZone> position;  // annotation only

  RallyEvent event() const { return {actor, action, exec_result, defense_result}; }
  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct RallyRecord {
  std::string match_id;
  int rally_id = 0;
  PlayerId server = PlayerId::P0;
  std::vector<ShotRecord> shots;
  PlayerId winner = PlayerId::P0;

  std::vector<RallyEvent> events() const;
  friend bool operator==(const RallyRecord&, const RallyRecord&) = default;
};

void to_json(Json& j, const ShotRecord& s);
void from_json(const Json& j, ShotRecord& s);
void to_json(Json& j, const RallyRecord& r);
void from_json(const Json& j, RallyRecord& r);

// Empty result means valid. Messages name the rally and the violated rule.
std::vector<std::string> validate_rally(const RallyRecord& r);

std::vector<RallyRecord> load_rally_log(const std::filesystem::path& path);
std::vector<RallyRecord> parse_rally_log(const std::string& text);
std::string format_rally_log(const std::vector<RallyRecord>& records);
void save_rally_log(const std::filesystem::path& path, const std::vector<RallyRecord>& records);

// Rally-granular split; both halves keep input order.
std::pair<std::vector<RallyRecord>, std::vector<RallyRecord>> split_rallies(
    const std::vector<RallyRecord>& records, double test_fraction, std::uint64_t seed);

struct PlayerSummary {
  std::int64_t shots = 0;
  std::int64_t faults = 0;
  std::int64_t rallies_won = 0;
  double fault_rate = 0.0;  // faults / shots
  double win_rate = 0.0;    // rallies_won / rallies
};

struct DatasetSummary {
  std::int64_t rallies = 0;
  std::int64_t shots = 0;
  std::array<std::int64_t, kNumShotTypes> shot_type_counts{};
  std::array<double, kNumShotTypes> shot_type_freq{};
  std::map<int, std::int64_t> rally_length_hist;
  std::array<PlayerSummary, 2> players{};
  double mean_rally_length = 0.0;
};

DatasetSummary summary_stats(const std::vector<RallyRecord>& records);
void to_json(Json& j, const DatasetSummary& s);

// ---- synthetic ground truth ---------------------------------------------

// Logistic weights for one player. Success terms apply when the player hits;
// return terms apply when the player defends the incoming shot.
struct PlayerDynamics {
  // shot success: bias[shot] + height[h] + zone[z] + backhand/around_head
  // penalties + incoming[serve, smash, ..., lift] + skill
  std::array<double, kNumShotTypes> succ_shot{};
  std::array<double, kNumHeights> succ_height{};
  std::array<double, kNumZones> succ_zone{};
  double succ_backhand = 0.0;
  double succ_around_head = 0.0;
  std::array<double, 1 + kNumShotTypes> succ_incoming{};

  // defensive return against the incoming shot's attributes
  std::array<double, kNumShotTypes> ret_shot{};
  std::array<double, kNumHeights> ret_height{};
  std::array<double, kNumZones> ret_zone{};
  double ret_backhand = 0.0;
  double ret_around_head = 0.0;

  // next-action preference logits
  std::array<std::array<double, kNumShotTypes>, 1 + kNumShotTypes> pref_shot{};  // by incoming
  std::array<std::array<double, kNumShotTypes>, kNumHeights> pref_shot_by_height{};
  std::array<std::array<double, 3>, kNumShotTypes> pref_row{};
  std::array<double, 3> pref_col{};
  std::array<std::array<double, kNumHeights>, kNumShotTypes> pref_height{};
  std::array<double, kNumExecCodes> pref_exec{};

  friend bool operator==(const PlayerDynamics&, const PlayerDynamics&) = default;
};

struct GroundTruthConfig {
  std::string name = "custom";
  std::array<PlayerDynamics, 2> players{};
  // Constant probabilities that bypass the logistic model and its clamp.
  std::optional<double> success_override;
  std::optional<double> return_override;
  std::uint64_t seed = 0;

  static constexpr double kClampLo = 0.01;
  static constexpr double kClampHi = 0.99;

  void validate() const;
  double p_success(PlayerId hitter, const ContextKey& ctx, const Action& a) const;
  double p_return(PlayerId defender, const Action& incoming) const;
  // Exact next-action distribution over the 486 flat indices.
  std::array<double, kNumActions> action_distribution(PlayerId player, const ContextKey& ctx) const;

  friend bool operator==(const GroundTruthConfig&, const GroundTruthConfig&) = default;
};

void to_json(Json& j, const PlayerDynamics& d);
void from_json(const Json& j, PlayerDynamics& d);
void to_json(Json& j, const GroundTruthConfig& c);
void from_json(const Json& j, GroundTruthConfig& c);

GroundTruthConfig load_ground_truth(const std::filesystem::path& path);
// Named presets: "balanced", "attacker-favored".
GroundTruthConfig ground_truth_preset(const std::string& name);
std::vector<std::string> ground_truth_preset_names();

// Adapters exposing the ground truth through the env's model interface.
OutcomeModelPtr ground_truth_success_model(const GroundTruthConfig& cfg, PlayerId hitter);
OutcomeModelPtr ground_truth_return_model(const GroundTruthConfig& cfg, PlayerId defender);

// Streams rallies of consecutive game-to-21 games. Per shot the draw order
// is: action, execution, return; the same order the environment uses.
class SyntheticGenerator {
 public:
  SyntheticGenerator(GroundTruthConfig cfg, std::uint64_t seed);
  RallyRecord next_rally();

 private:
  GroundTruthConfig cfg_;
  std::uint64_t seed_;
  Rng rng_;
  ScoreState score_;
  int game_ = 0;
  int rally_in_game_ = 0;
};

std::vector<RallyRecord> synth_generate(const GroundTruthConfig& cfg, int n_rallies,
                                        std::uint64_t seed);

}  // namespace shuttle
