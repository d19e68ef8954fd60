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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "shuttle/dataset.hpp"
#include "shuttle/error.hpp"

namespace shuttle {

namespace {

constexpr int kRallyShotCap = 10000;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp_prob(double p) {
  return std::clamp(p, GroundTruthConfig::kClampLo, GroundTruthConfig::kClampHi);
}

int incoming_slot(const ContextKey& ctx) {
  return ctx.serving ? 0 : 1 + static_cast<int>(*ctx.prev_shot);
}

bool finite_all(const auto& arr) {
  for (double v : arr) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

class GroundTruthSuccess final : public OutcomeModel {
 public:
  GroundTruthSuccess(GroundTruthConfig cfg, PlayerId hitter) : cfg_(std::move(cfg)), hitter_(hitter) {}
  double probability(const ContextKey& ctx, const Action& a) const override {
    return cfg_.p_success(hitter_, ctx, a);
  }

 private:
  GroundTruthConfig cfg_;
  PlayerId hitter_;
};

class GroundTruthReturn final : public OutcomeModel {
 public:
  GroundTruthReturn(GroundTruthConfig cfg, PlayerId defender)
      : cfg_(std::move(cfg)), defender_(defender) {}
  double probability(const ContextKey&, const Action& a) const override {
    return cfg_.p_return(defender_, a);
  }

 private:
  GroundTruthConfig cfg_;
  PlayerId defender_;
};

}  // namespace

void GroundTruthConfig::validate() const {
  for (const auto& d : players) {
    bool ok = finite_all(d.succ_shot) && finite_all(d.succ_height) && finite_all(d.succ_zone) &&
              finite_all(d.succ_incoming) && finite_all(d.ret_shot) && finite_all(d.ret_height) &&
              finite_all(d.ret_zone) && finite_all(d.pref_col) && finite_all(d.pref_exec) &&
              std::isfinite(d.succ_backhand) && std::isfinite(d.succ_around_head) &&
              std::isfinite(d.ret_backhand) && std::isfinite(d.ret_around_head);
    for (const auto& row : d.pref_shot) ok = ok && finite_all(row);
    for (const auto& row : d.pref_shot_by_height) ok = ok && finite_all(row);
    for (const auto& row : d.pref_row) ok = ok && finite_all(row);
    for (const auto& row : d.pref_height) ok = ok && finite_all(row);
    if (!ok) throw ValidationError("ground-truth config '" + name + "' has non-finite weights");
  }
  for (const auto& ov : {success_override, return_override}) {
    if (ov && !(*ov >= 0.0 && *ov <= 1.0)) {
      throw ValidationError("probability override must lie in [0, 1]");
    }
  }
  // The rally continues with probability p_succ * p_ret per shot.
  if (success_override && return_override && *success_override == 1.0 && *return_override == 1.0) {
    throw ValidationError("success_override = return_override = 1 never ends a rally");
  }
}

double GroundTruthConfig::p_success(PlayerId hitter, const ContextKey& ctx, const Action& a) const {
  if (success_override) return *success_override;
  const PlayerDynamics& d = players[index_of(hitter)];
  double logit = d.succ_shot[static_cast<int>(a.shot)] + d.succ_height[static_cast<int>(a.height)] +
                 d.succ_zone[a.target.index()] + d.succ_incoming[incoming_slot(ctx)];
  if (a.exec.backhand) logit += d.succ_backhand;
  if (a.exec.around_head) logit += d.succ_around_head;
  return clamp_prob(sigmoid(logit));
}

double GroundTruthConfig::p_return(PlayerId defender, const Action& incoming) const {
  if (return_override) return *return_override;
  const PlayerDynamics& d = players[index_of(defender)];
  double logit = d.ret_shot[static_cast<int>(incoming.shot)] +
                 d.ret_height[static_cast<int>(incoming.height)] + d.ret_zone[incoming.target.index()];
  if (incoming.exec.backhand) logit += d.ret_backhand;
  if (incoming.exec.around_head) logit += d.ret_around_head;
  return clamp_prob(sigmoid(logit));
}

std::array<double, kNumActions> GroundTruthConfig::action_distribution(PlayerId player,
                                                                       const ContextKey& ctx) const {
  const PlayerDynamics& d = players[index_of(player)];
  const auto& by_incoming = d.pref_shot[incoming_slot(ctx)];
  std::array<double, kNumActions> p{};
  double max_logit = -1e300;
  for (int i = 0; i < kNumActions; ++i) {
    const Action a = decode_action(i);
    const int s = static_cast<int>(a.shot);
    double logit = by_incoming[s] + d.pref_row[s][a.target.row] + d.pref_col[a.target.col] +
                   d.pref_height[s][static_cast<int>(a.height)] + d.pref_exec[a.exec.code()];
    if (!ctx.serving) logit += d.pref_shot_by_height[static_cast<int>(*ctx.prev_height)][s];
    p[i] = logit;
    max_logit = std::max(max_logit, logit);
  }
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - max_logit);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

OutcomeModelPtr ground_truth_success_model(const GroundTruthConfig& cfg, PlayerId hitter) {
  return std::make_shared<GroundTruthSuccess>(cfg, hitter);
}

OutcomeModelPtr ground_truth_return_model(const GroundTruthConfig& cfg, PlayerId defender) {
  return std::make_shared<GroundTruthReturn>(cfg, defender);
}

// ---- JSON ----------------------------------------------------------------

void to_json(Json& j, const PlayerDynamics& d) {
  j = Json{{"success",
            {{"shot", d.succ_shot},
             {"height", d.succ_height},
             {"zone", d.succ_zone},
             {"backhand", d.succ_backhand},
             {"around_head", d.succ_around_head},
             {"incoming", d.succ_incoming}}},
           {"return",
            {{"shot", d.ret_shot},
             {"height", d.ret_height},
             {"zone", d.ret_zone},
             {"backhand", d.ret_backhand},
             {"around_head", d.ret_around_head}}},
           {"preference",
            {{"shot_by_incoming", d.pref_shot},
             {"shot_by_incoming_height", d.pref_shot_by_height},
             {"row_by_shot", d.pref_row},
             {"col", d.pref_col},
             {"height_by_shot", d.pref_height},
             {"exec", d.pref_exec}}}};
}

void from_json(const Json& j, PlayerDynamics& d) {
  const Json& s = j.at("success");
  s.at("shot").get_to(d.succ_shot);
  s.at("height").get_to(d.succ_height);
  s.at("zone").get_to(d.succ_zone);
  s.at("backhand").get_to(d.succ_backhand);
  s.at("around_head").get_to(d.succ_around_head);
  s.at("incoming").get_to(d.succ_incoming);
  const Json& r = j.at("return");
  r.at("shot").get_to(d.ret_shot);
  r.at("height").get_to(d.ret_height);
  r.at("zone").get_to(d.ret_zone);
  r.at("backhand").get_to(d.ret_backhand);
  r.at("around_head").get_to(d.ret_around_head);
  const Json& p = j.at("preference");
  p.at("shot_by_incoming").get_to(d.pref_shot);
  p.at("shot_by_incoming_height").get_to(d.pref_shot_by_height);
  p.at("row_by_shot").get_to(d.pref_row);
  p.at("col").get_to(d.pref_col);
  p.at("height_by_shot").get_to(d.pref_height);
  p.at("exec").get_to(d.pref_exec);
}

void to_json(Json& j, const GroundTruthConfig& c) {
  j = Json{{"name", c.name}, {"players", c.players}, {"seed", c.seed}};
  j["success_override"] = c.success_override ? Json(*c.success_override) : Json(nullptr);
  j["return_override"] = c.return_override ? Json(*c.return_override) : Json(nullptr);
}

void from_json(const Json& j, GroundTruthConfig& c) {
  c.name = j.value("name", std::string("custom"));
  j.at("players").get_to(c.players);
  c.seed = j.value("seed", std::uint64_t{0});
  c.success_override.reset();
  c.return_override.reset();
  if (auto it = j.find("success_override"); it != j.end() && !it->is_null()) c.success_override = it->get<double>();
  if (auto it = j.find("return_override"); it != j.end() && !it->is_null()) c.return_override = it->get<double>();
  c.validate();
}

GroundTruthConfig load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open ground-truth config " + path.string());
  try {
    return Json::parse(in).get<GroundTruthConfig>();
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---- presets ---------------------------------------------------------------

namespace {

PlayerDynamics balanced_player() {
  PlayerDynamics d;
  //            smash drop clear drive net  lift
  d.succ_shot = {1.2, 1.8, 2.8, 2.2, 1.6, 3.0};
  d.succ_height = {-0.2, 0.1, 0.3};
  const std::array<double, 3> succ_row = {-0.2, 0.4, 0.0};
  const std::array<double, 3> succ_col = {-0.4, 0.3, -0.4};
  for (int z = 0; z < kNumZones; ++z) d.succ_zone[z] = succ_row[z / 3] + succ_col[z % 3];
  d.succ_backhand = -0.7;
  d.succ_around_head = -0.4;
  //                serve smash drop clear drive net  lift
  d.succ_incoming = {0.8, -1.0, -0.3, 0.3, -0.4, -0.6, 0.4};

  d.ret_shot = {0.2, 1.2, 2.6, 1.3, 1.1, 2.8};
  d.ret_height = {-0.3, 0.0, 0.8};
  const std::array<double, 3> ret_row = {0.0, 0.6, 0.1};
  const std::array<double, 3> ret_col = {-0.5, 0.5, -0.5};
  for (int z = 0; z < kNumZones; ++z) d.ret_zone[z] = ret_row[z / 3] + ret_col[z % 3];
  d.ret_backhand = 0.3;
  d.ret_around_head = -0.2;

  d.pref_shot = {{
      {-3.0, -2.0, -0.5, -1.5, 1.0, 1.2},  // serve
      {-2.0, -0.5, -0.5, 0.5, 0.3, 1.2},   // vs smash
      {-1.5, 0.0, -0.5, -0.5, 1.2, 1.0},   // vs drop
      {1.0, 0.8, 0.8, -0.5, -1.5, -0.5},   // vs clear
      {0.0, 0.0, -0.3, 1.2, 0.2, 0.0},     // vs drive
      {-1.5, -0.5, -1.0, -0.2, 1.2, 1.3},  // vs net shot
      {1.3, 0.8, 0.6, -0.3, -1.5, -0.5},   // vs lift
  }};
  d.pref_shot_by_height = {{
      {-0.5, 0.0, 0.0, 0.3, 0.2, 0.3},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {0.5, 0.1, 0.0, -0.3, -0.3, -0.2},
  }};
  d.pref_row = {{
      {0.2, 0.5, -0.5},
      {1.2, 0.0, -2.0},
      {-2.5, -0.5, 1.5},
      {-0.5, 0.8, 0.2},
      {1.8, -0.5, -3.0},
      {-2.0, -0.3, 1.5},
  }};
  d.pref_col = {0.1, 0.0, 0.1};
  d.pref_height = {{
      {1.5, 0.3, -2.0},
      {0.5, 0.5, -1.0},
      {-2.5, -0.3, 1.5},
      {0.5, 1.0, -2.0},
      {1.5, -0.5, -2.5},
      {-2.0, 0.0, 1.5},
  }};
  d.pref_exec = {0.0, -1.5, -2.0};
  return d;
}

GroundTruthConfig balanced_preset() {
  GroundTruthConfig c;
  c.name = "balanced";
  c.players = {balanced_player(), balanced_player()};
  c.seed = 20260101;
  return c;
}

GroundTruthConfig attacker_favored_preset() {
  GroundTruthConfig c = balanced_preset();
  c.name = "attacker-favored";
  PlayerDynamics& attacker = c.players[0];
  PlayerDynamics& defender = c.players[1];
  attacker.succ_shot[static_cast<int>(ShotType::Smash)] += 0.6;
  attacker.succ_shot[static_cast<int>(ShotType::Drop)] += 0.3;
  for (auto& row : attacker.pref_shot) {
    row[static_cast<int>(ShotType::Smash)] += 0.8;
    row[static_cast<int>(ShotType::Drop)] += 0.3;
  }
  for (double& v : defender.ret_shot) v += 0.3;
  for (auto& row : defender.pref_shot) {
    row[static_cast<int>(ShotType::Lift)] += 0.5;
    row[static_cast<int>(ShotType::Clear)] += 0.5;
  }
  c.seed = 20260102;
  return c;
}

}  // namespace

std::vector<std::string> ground_truth_preset_names() { return {"balanced", "attacker-favored"}; }

GroundTruthConfig ground_truth_preset(const std::string& name) {
  if (name == "balanced") return balanced_preset();
  if (name == "attacker-favored") return attacker_favored_preset();
  throw NotFoundError("unknown ground-truth preset '" + name + "'");
}

// ---- generator ---------------------------------------------------------------

SyntheticGenerator::SyntheticGenerator(GroundTruthConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed), rng_(seed) {
  cfg_.validate();
}

RallyRecord SyntheticGenerator::next_rally() {
  if (score_.game_over) {
    score_ = ScoreState{};
    ++game_;
    rally_in_game_ = 0;
  }
  RallyRecord rally;
  rally.match_id = "synth-" + std::to_string(seed_) + "-g" + std::to_string(game_);
  rally.rally_id = rally_in_game_++;
  rally.server = score_.server;

  std::vector<RallyEvent> events;
  PlayerId hitter = rally.server;
  for (int shot = 0;; ++shot) {
    if (shot >= kRallyShotCap) throw StateError("non-terminating rally in synthetic generator");
    const ContextKey ctx = context_of(events);
    const auto dist = cfg_.action_distribution(hitter, ctx);
    const Action a = decode_action(static_cast<int>(rng_.categorical(dist)));

    RallyEvent ev{hitter, a, ExecResult::Valid, std::nullopt};
    if (!rng_.bernoulli(cfg_.p_success(hitter, ctx, a))) {
      ev.exec_result = ExecResult::Fault;
    } else {
      ev.defense_result = rng_.bernoulli(cfg_.p_return(opponent(hitter), a)) ? DefenseResult::Returned
                                                                             : DefenseResult::Missed;
    }
    rally.shots.push_back(ShotRecord{rally.match_id, rally.rally_id, shot, ev.actor, ev.action,
                                     ev.exec_result, ev.defense_result, std::nullopt});
    events.push_back(ev);
    if (ev.terminal()) {
      rally.winner = ev.rally_winner();
      break;
    }
    hitter = opponent(hitter);
  }
  score_ = score_.after_rally(rally.winner, ScoreRule::game_to_21());
  return rally;
}

std::vector<RallyRecord> synth_generate(const GroundTruthConfig& cfg, int n_rallies,
                                        std::uint64_t seed) {
  if (n_rallies < 1) throw RangeError("n_rallies must be >= 1");
  SyntheticGenerator gen(cfg, seed);
  std::vector<RallyRecord> out;
  out.reserve(static_cast<std::size_t>(n_rallies));
  for (int i = 0; i < n_rallies; ++i) out.push_back(gen.next_rally());
  return out;
}

}  // namespace shuttle
