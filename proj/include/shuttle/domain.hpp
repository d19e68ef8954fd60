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

// Tactical domain types shared by every module: actions and their flat
// encoding, rally events, scoring, and viewer-relative observations.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace shuttle {

using Json = nlohmann::json;

enum class ShotType : std::uint8_t { Smash, Drop, Clear, Drive, NetShot, Lift };
inline constexpr int kNumShotTypes = 6;

enum class HeightBand : std::uint8_t { Low, Mid, High };
inline constexpr int kNumHeights = 3;

enum class Half : std::uint8_t { Near, Far };

enum class PlayerId : std::uint8_t { P0, P1 };

constexpr PlayerId opponent(PlayerId p) { return p == PlayerId::P0 ? PlayerId::P1 : PlayerId::P0; }
constexpr int index_of(PlayerId p) { return static_cast<int>(p); }

// One of the 9 cells of a half court. Row 0 is net-side, 2 is baseline;
// col 0/1/2 is left/center/right as seen by the hitter.
struct Zone {
  int row = 0;
  int col = 0;

  constexpr int index() const { return row * 3 + col; }
  constexpr Zone mirrored() const { return Zone{row, 2 - col}; }
  static Zone from_index(int idx);
  friend constexpr bool operator==(Zone, Zone) = default;
};
inline constexpr int kNumZones = 9;

struct CourtZone {
  Half half = Half::Far;
  Zone zone;

  CourtZone mirrored() const { return CourtZone{half, zone.mirrored()}; }
  friend bool operator==(const CourtZone&, const CourtZone&) = default;
};

struct ExecAttrs {
  bool backhand = false;
  bool around_head = false;

  // 0 none, 1 backhand, 2 around-head. Throws ConstraintError when both set.
  int code() const;
  static ExecAttrs from_code(int code);
  friend bool operator==(const ExecAttrs&, const ExecAttrs&) = default;
};
inline constexpr int kNumExecCodes = 3;

struct Action {
  ShotType shot = ShotType::Smash;
  Zone target;  // on the opponent's half, hitter's perspective
  HeightBand height = HeightBand::Low;
  ExecAttrs exec;

  friend bool operator==(const Action&, const Action&) = default;
};

inline constexpr int kNumActions = kNumShotTypes * kNumZones * kNumHeights * kNumExecCodes;  // 486

int encode_action(const Action& a);
Action decode_action(int idx);

enum class ExecResult : std::uint8_t { Valid, Fault };
enum class DefenseResult : std::uint8_t { Returned, Missed };

struct RallyEvent {
  PlayerId actor = PlayerId::P0;
  Action action;
  ExecResult exec_result = ExecResult::Valid;
  std::optional<DefenseResult> defense_result;  // present iff exec_result == Valid

  bool terminal() const {
    return exec_result == ExecResult::Fault || defense_result == DefenseResult::Missed;
  }
  // Player awarded the rally if this event ends it.
  PlayerId rally_winner() const {
    return exec_result == ExecResult::Fault ? opponent(actor) : actor;
  }
  friend bool operator==(const RallyEvent&, const RallyEvent&) = default;
};

// Game termination rule. Game21Cap30 is rally scoring to 21, win by two,
// capped at 30; FirstToN ends as soon as either side reaches n.
struct ScoreRule {
  enum class Kind : std::uint8_t { Game21Cap30, FirstToN };
  Kind kind = Kind::Game21Cap30;
  int n = 21;

  static ScoreRule game_to_21() { return {}; }
  static ScoreRule first_to(int n) { return {Kind::FirstToN, n}; }
  bool game_over(int a, int b) const;
  std::string name() const;
  static ScoreRule parse(std::string_view text);
  friend bool operator==(const ScoreRule&, const ScoreRule&) = default;
};

struct ScoreState {
  std::array<int, 2> points{0, 0};
  PlayerId server = PlayerId::P0;
  bool game_over = false;
  std::optional<PlayerId> winner;

  int of(PlayerId p) const { return points[index_of(p)]; }
  int rallies_played() const { return points[0] + points[1]; }
  // Awards the rally: winner gains a point and serves next.
  ScoreState after_rally(PlayerId rally_winner, const ScoreRule& rule) const;
  friend bool operator==(const ScoreState&, const ScoreState&) = default;
};

// Per-slot feature width: shot 6 + zone 9 + height 3 + exec 3 + actor 2.
inline constexpr int kSlotFeatures = kNumShotTypes + kNumZones + kNumHeights + kNumExecCodes + 2;

constexpr int observation_dim(int history_window) { return kSlotFeatures * history_window + 3; }

struct ObservationOptions {
  int history_window = 4;
  bool observe_score = true;
  double score_scale = 30.0;
};

struct Observation {
  std::vector<std::optional<RallyEvent>> history;  // oldest first, nullopt = padding
  int score_self = 0;
  int score_opp = 0;
  bool serving = false;
  std::vector<double> features;
};

// `events` is the current rally prefix. Zones of events hit by the other
// player are mirrored so every zone is expressed from `viewer`'s side.
Observation build_observation(std::span<const RallyEvent> events, const ScoreState& score,
                              PlayerId viewer, const ObservationOptions& opts = {});

// ---- canonical names and JSON -------------------------------------------

std::string_view to_string(ShotType s);
std::string_view to_string(HeightBand h);
std::string_view to_string(PlayerId p);
std::string_view to_string(ExecResult r);
std::string_view to_string(DefenseResult r);
std::string_view exec_name(const ExecAttrs& e);

ShotType parse_shot_type(std::string_view s);
HeightBand parse_height(std::string_view s);
PlayerId parse_player(std::string_view s);
ExecResult parse_exec_result(std::string_view s);
DefenseResult parse_defense_result(std::string_view s);
ExecAttrs parse_exec(std::string_view s);

void to_json(Json& j, ShotType s);
void from_json(const Json& j, ShotType& s);
void to_json(Json& j, HeightBand h);
void from_json(const Json& j, HeightBand& h);
void to_json(Json& j, PlayerId p);
void from_json(const Json& j, PlayerId& p);
void to_json(Json& j, ExecResult r);
void from_json(const Json& j, ExecResult& r);
void to_json(Json& j, DefenseResult r);
void from_json(const Json& j, DefenseResult& r);
void to_json(Json& j, const Zone& z);
void from_json(const Json& j, Zone& z);
void to_json(Json& j, const CourtZone& z);
void from_json(const Json& j, CourtZone& z);
void to_json(Json& j, const ExecAttrs& e);
void from_json(const Json& j, ExecAttrs& e);
void to_json(Json& j, const Action& a);
void from_json(const Json& j, Action& a);
void to_json(Json& j, const RallyEvent& e);
void from_json(const Json& j, RallyEvent& e);
void to_json(Json& j, const ScoreRule& r);
void from_json(const Json& j, ScoreRule& r);
void to_json(Json& j, const ScoreState& s);
void from_json(const Json& j, ScoreState& s);
void to_json(Json& j, const Observation& o);

}  // namespace shuttle
