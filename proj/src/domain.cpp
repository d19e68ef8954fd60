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

#include "shuttle/domain.hpp"

#include <algorithm>
#include <cstdlib>

#include "shuttle/error.hpp"

namespace shuttle {

namespace {

constexpr std::array<std::string_view, kNumShotTypes> kShotNames = {
    "smash", "drop", "clear", "drive", "net_shot", "lift"};
constexpr std::array<std::string_view, kNumHeights> kHeightNames = {"low", "mid", "high"};
constexpr std::array<std::string_view, kNumExecCodes> kExecNames = {"none", "backhand",
                                                                    "around_head"};

template <std::size_t N>
int lookup(const std::array<std::string_view, N>& names, std::string_view s,
           std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<int>(i);
  }
  throw ParseError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

Zone Zone::from_index(int idx) {
  if (idx < 0 || idx >= kNumZones) throw RangeError("zone index out of range: " + std::to_string(idx));
  return Zone{idx / 3, idx % 3};
}

int ExecAttrs::code() const {
  if (backhand && around_head) {
    throw ConstraintError("backhand and around_head are mutually exclusive");
  }
  return backhand ? 1 : (around_head ? 2 : 0);
}

ExecAttrs ExecAttrs::from_code(int code) {
  switch (code) {
    case 0: return {};
    case 1: return {true, false};
    case 2: return {false, true};
    default: throw RangeError("exec code out of range: " + std::to_string(code));
  }
}

int encode_action(const Action& a) {
  const int shot = static_cast<int>(a.shot);
  const int height = static_cast<int>(a.height);
  if (shot < 0 || shot >= kNumShotTypes || height < 0 || height >= kNumHeights ||
      a.target.row < 0 || a.target.row > 2 || a.target.col < 0 || a.target.col > 2) {
    throw RangeError("action component out of range");
  }
  return ((shot * kNumZones + a.target.index()) * kNumHeights + height) * kNumExecCodes +
         a.exec.code();
}

Action decode_action(int idx) {
  if (idx < 0 || idx >= kNumActions) {
    throw RangeError("action index out of range: " + std::to_string(idx));
  }
  Action a;
  a.exec = ExecAttrs::from_code(idx % kNumExecCodes);
  idx /= kNumExecCodes;
  a.height = static_cast<HeightBand>(idx % kNumHeights);
  idx /= kNumHeights;
  a.target = Zone::from_index(idx % kNumZones);
  a.shot = static_cast<ShotType>(idx / kNumZones);
  return a;
}

bool ScoreRule::game_over(int a, int b) const {
  const int hi = std::max(a, b);
  if (kind == Kind::FirstToN) return hi >= n;
  return (hi >= 21 && std::abs(a - b) >= 2) || hi >= 30;
}

std::string ScoreRule::name() const {
  if (kind == Kind::FirstToN) return "first_to_" + std::to_string(n);
  return "game_to_21_cap_30";
}

ScoreRule ScoreRule::parse(std::string_view text) {
  if (text == "game_to_21_cap_30") return game_to_21();
  constexpr std::string_view prefix = "first_to_";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string digits(text.substr(prefix.size()));
    char* end = nullptr;
    const long n = std::strtol(digits.c_str(), &end, 10);
    if (!digits.empty() && end && *end == '\0' && n >= 1) return first_to(static_cast<int>(n));
  }
  throw ParseError("unknown score rule '" + std::string(text) + "'");
}

ScoreState ScoreState::after_rally(PlayerId rally_winner, const ScoreRule& rule) const {
  if (game_over) throw StateError("game already over");
  ScoreState next = *this;
  next.points[index_of(rally_winner)] += 1;
  next.server = rally_winner;
  if (rule.game_over(next.points[0], next.points[1])) {
    next.game_over = true;
    next.winner = next.points[0] > next.points[1] ? PlayerId::P0 : PlayerId::P1;
  }
  return next;
}

Observation build_observation(std::span<const RallyEvent> events, const ScoreState& score,
                              PlayerId viewer, const ObservationOptions& opts) {
  const int window = opts.history_window;
  if (window < 1) throw RangeError("history window must be >= 1");

  Observation obs;
  obs.history.assign(static_cast<std::size_t>(window), std::nullopt);
  obs.features.assign(static_cast<std::size_t>(observation_dim(window)), 0.0);

  const std::size_t n = std::min<std::size_t>(events.size(), static_cast<std::size_t>(window));
  const std::size_t first_slot = static_cast<std::size_t>(window) - n;
  for (std::size_t i = 0; i < n; ++i) {
    const RallyEvent& ev = events[events.size() - n + i];
    const std::size_t slot = first_slot + i;
    obs.history[slot] = ev;

    const bool own = ev.actor == viewer;
    const Zone zone = own ? ev.action.target : ev.action.target.mirrored();
    double* f = obs.features.data() + slot * kSlotFeatures;
    f[static_cast<int>(ev.action.shot)] = 1.0;
    f += kNumShotTypes;
    f[zone.index()] = 1.0;
    f += kNumZones;
    f[static_cast<int>(ev.action.height)] = 1.0;
    f += kNumHeights;
    f[ev.action.exec.code()] = 1.0;
    f += kNumExecCodes;
    f[own ? 0 : 1] = 1.0;
  }

  obs.score_self = score.of(viewer);
  obs.score_opp = score.of(opponent(viewer));
  obs.serving = score.server == viewer;
  double* tail = obs.features.data() + static_cast<std::size_t>(window) * kSlotFeatures;
  if (opts.observe_score) {
    tail[0] = obs.score_self / opts.score_scale;
    tail[1] = obs.score_opp / opts.score_scale;
  }
  tail[2] = obs.serving ? 1.0 : 0.0;
  return obs;
}

// ---- names ---------------------------------------------------------------

std::string_view to_string(ShotType s) { return kShotNames[static_cast<int>(s)]; }
std::string_view to_string(HeightBand h) { return kHeightNames[static_cast<int>(h)]; }
std::string_view to_string(PlayerId p) { return p == PlayerId::P0 ? "p0" : "p1"; }
std::string_view to_string(ExecResult r) { return r == ExecResult::Valid ? "valid" : "fault"; }
std::string_view to_string(DefenseResult r) {
  return r == DefenseResult::Returned ? "returned" : "missed";
}
std::string_view exec_name(const ExecAttrs& e) { return kExecNames[e.code()]; }

ShotType parse_shot_type(std::string_view s) {
  return static_cast<ShotType>(lookup(kShotNames, s, "shot type"));
}
HeightBand parse_height(std::string_view s) {
  return static_cast<HeightBand>(lookup(kHeightNames, s, "height band"));
}
PlayerId parse_player(std::string_view s) {
  if (s == "p0") return PlayerId::P0;
  if (s == "p1") return PlayerId::P1;
  throw ParseError("unknown player '" + std::string(s) + "'");
}
ExecResult parse_exec_result(std::string_view s) {
  if (s == "valid") return ExecResult::Valid;
  if (s == "fault") return ExecResult::Fault;
  throw ParseError("unknown exec_result '" + std::string(s) + "'");
}
DefenseResult parse_defense_result(std::string_view s) {
  if (s == "returned") return DefenseResult::Returned;
  if (s == "missed") return DefenseResult::Missed;
  throw ParseError("unknown defense_result '" + std::string(s) + "'");
}
ExecAttrs parse_exec(std::string_view s) {
  return ExecAttrs::from_code(lookup(kExecNames, s, "exec attribute"));
}

// ---- JSON ----------------------------------------------------------------

namespace {
std::string_view as_sv(const Json& j) {
  if (!j.is_string()) throw ParseError("expected string, got " + j.dump());
  return j.get_ref<const std::string&>();
}
}  // namespace

void to_json(Json& j, ShotType s) { j = to_string(s); }
void from_json(const Json& j, ShotType& s) { s = parse_shot_type(as_sv(j)); }
void to_json(Json& j, HeightBand h) { j = to_string(h); }
void from_json(const Json& j, HeightBand& h) { h = parse_height(as_sv(j)); }
void to_json(Json& j, PlayerId p) { j = to_string(p); }
void from_json(const Json& j, PlayerId& p) { p = parse_player(as_sv(j)); }
void to_json(Json& j, ExecResult r) { j = to_string(r); }
void from_json(const Json& j, ExecResult& r) { r = parse_exec_result(as_sv(j)); }
void to_json(Json& j, DefenseResult r) { j = to_string(r); }
void from_json(const Json& j, DefenseResult& r) { r = parse_defense_result(as_sv(j)); }

void to_json(Json& j, const Zone& z) { j = Json{{"row", z.row}, {"col", z.col}}; }
void from_json(const Json& j, Zone& z) {
  z.row = j.at("row").get<int>();
  z.col = j.at("col").get<int>();
  if (z.row < 0 || z.row > 2 || z.col < 0 || z.col > 2) {
    throw ParseError("zone out of range: " + j.dump());
  }
}

void to_json(Json& j, const CourtZone& z) {
  j = Json{{"half", z.half == Half::Near ? "near" : "far"}, {"row", z.zone.row}, {"col", z.zone.col}};
}
void from_json(const Json& j, CourtZone& z) {
  const auto half = as_sv(j.at("half"));
  if (half != "near" && half != "far") throw ParseError("unknown half '" + std::string(half) + "'");
  z.half = half == "near" ? Half::Near : Half::Far;
  from_json(j, z.zone);
}

void to_json(Json& j, const ExecAttrs& e) { j = exec_name(e); }
void from_json(const Json& j, ExecAttrs& e) { e = parse_exec(as_sv(j)); }

void to_json(Json& j, const Action& a) {
  j = Json{{"shot", a.shot}, {"target", a.target}, {"height", a.height}, {"exec", a.exec}};
}
void from_json(const Json& j, Action& a) {
  a.shot = j.at("shot").get<ShotType>();
  a.target = j.at("target").get<Zone>();
  a.height = j.at("height").get<HeightBand>();
  a.exec = j.at("exec").get<ExecAttrs>();
}

void to_json(Json& j, const RallyEvent& e) {
  j = Json{{"actor", e.actor}, {"action", e.action}, {"exec_result", e.exec_result}};
  if (e.defense_result) j["defense_result"] = *e.defense_result;
}
void from_json(const Json& j, RallyEvent& e) {
  e.actor = j.at("actor").get<PlayerId>();
  e.action = j.at("action").get<Action>();
  e.exec_result = j.at("exec_result").get<ExecResult>();
  e.defense_result.reset();
  if (auto it = j.find("defense_result"); it != j.end() && !it->is_null()) {
    e.defense_result = it->get<DefenseResult>();
  }
}

void to_json(Json& j, const ScoreRule& r) { j = r.name(); }
void from_json(const Json& j, ScoreRule& r) { r = ScoreRule::parse(as_sv(j)); }

void to_json(Json& j, const ScoreState& s) {
  j = Json{{"points", s.points}, {"server", s.server}, {"game_over", s.game_over}};
  j["winner"] = s.winner ? Json(*s.winner) : Json(nullptr);
}
void from_json(const Json& j, ScoreState& s) {
  s.points = j.at("points").get<std::array<int, 2>>();
  s.server = j.at("server").get<PlayerId>();
  s.game_over = j.at("game_over").get<bool>();
  s.winner.reset();
  if (auto it = j.find("winner"); it != j.end() && !it->is_null()) s.winner = it->get<PlayerId>();
}

void to_json(Json& j, const Observation& o) {
  Json history = Json::array();
  for (const auto& slot : o.history) history.push_back(slot ? Json(*slot) : Json(nullptr));
  j = Json{{"history", history},
           {"score_self", o.score_self},
           {"score_opp", o.score_opp},
           {"serving", o.serving},
           {"feature_vec", o.features}};
}

}  // namespace shuttle
