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

#include "shuttle/env.hpp"

#include "shuttle/error.hpp"

namespace shuttle {

void EnvConfig::validate(bool single_agent) const {
  for (int p = 0; p < 2; ++p) {
    if (!success[p] || !ret[p]) throw ValidationError("env config needs success and return models for both players");
  }
  if (!(reward_win > 0.0 && reward_loss < 0.0)) {
    throw ValidationError("env rewards must satisfy reward_win > 0 > reward_loss");
  }
  if (observation.history_window < 1) throw ValidationError("history window must be >= 1");
  if (score_rule.kind == ScoreRule::Kind::FirstToN && score_rule.n < 1) {
    throw ValidationError("first_to_n needs n >= 1");
  }
  if (single_agent && !opponent) throw ValidationError("single-agent mode needs an opponent policy");
}

Env::Env(EnvConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate(false);
  start_game(std::nullopt);
}

void Env::start_game(std::optional<std::uint64_t> seed) {
  if (seed) rng_.reseed(*seed);
  score_ = ScoreState{};
  score_.server = cfg_.initial_server;
  events_.clear();
  rallies_.clear();
  to_act_ = cfg_.initial_server;
}

Observation Env::observation_for(PlayerId viewer) const {
  return build_observation(events_, score_, viewer, cfg_.observation);
}

RallyEvent Env::resolve(PlayerId hitter, const Action& a) {
  if (score_.game_over) throw StateError("game is over; call reset()");
  if (hitter != to_act_) throw StateError("player " + std::string(to_string(hitter)) + " is not on turn");
  if (events_.size() >= static_cast<std::size_t>(kMaxRallyShots)) {
    throw StateError("non-terminating rally: exceeded " + std::to_string(kMaxRallyShots) + " shots");
  }
  (void)a.exec.code();  // rejects backhand + around_head

  const PlayerId defender = opponent(hitter);
  RallyEvent ev{hitter, a, ExecResult::Valid, std::nullopt};
  double p_success = cfg_.success[index_of(hitter)]->probability(context_of(events_), a);
  if (cfg_.opponent_infallible && hitter == opponent_seat()) p_success = 1.0;
  if (!rng_.bernoulli(p_success)) {
    ev.exec_result = ExecResult::Fault;
  } else {
    const double p_return = cfg_.ret[index_of(defender)]->probability(ContextKey::facing(a), a);
    ev.defense_result = rng_.bernoulli(p_return) ? DefenseResult::Returned : DefenseResult::Missed;
  }
  events_.push_back(ev);
  if (ev.terminal()) {
    finish_rally(ev);
  } else {
    to_act_ = defender;
  }
  return ev;
}

void Env::finish_rally(const RallyEvent& last) {
  RallyRecord r;
  r.match_id = cfg_.match_id;
  r.rally_id = static_cast<int>(rallies_.size());
  r.server = score_.server;
  r.winner = last.rally_winner();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const RallyEvent& e = events_[i];
    r.shots.push_back(ShotRecord{r.match_id, r.rally_id, static_cast<int>(i), e.actor, e.action,
                                 e.exec_result, e.defense_result, std::nullopt});
  }
  rallies_.push_back(std::move(r));
  score_ = score_.after_rally(last.rally_winner(), cfg_.score_rule);
  events_.clear();
  to_act_ = score_.server;
}

int Env::opponent_act() {
  const PlayerId opp = opponent_seat();
  const Observation obs = observation_for(opp);
  return cfg_.opponent->act_index(PolicyInput{obs, context(), opp}, rng_);
}

void Env::pre_resolve_opponent_serves(std::vector<RallyRecord>* auto_rallies) {
  while (!score_.game_over && events_.empty() && to_act_ == opponent_seat()) {
    const std::size_t before = rallies_.size();
    resolve(opponent_seat(), decode_action(opponent_act()));
    if (rallies_.size() > before && auto_rallies) auto_rallies->push_back(rallies_.back());
  }
}

Observation Env::reset(std::optional<std::uint64_t> seed) {
  cfg_.validate(true);
  start_game(seed);
  pre_resolve_opponent_serves(nullptr);
  return observation_for(cfg_.agent_seat);
}

Observation Env::reset_two_agent(std::optional<std::uint64_t> seed) {
  start_game(seed);
  return observation_for(to_act_);
}

StepResult Env::step(const Action& a) {
  if (!cfg_.opponent) throw StateError("step() needs an opponent policy; use step_two_agent()");
  if (score_.game_over) throw StateError("game is over; call reset()");
  const PlayerId agent = cfg_.agent_seat;
  if (to_act_ != agent) throw StateError("agent is not on turn");

  StepResult res;
  const RallyEvent mine = resolve(agent, a);
  res.info.exec_result = mine.exec_result;
  res.info.defense_result = mine.defense_result;
  if (mine.terminal()) {
    res.rally_done = true;
    res.reward = mine.rally_winner() == agent ? cfg_.reward_win : cfg_.reward_loss;
  } else {
    const RallyEvent reply = resolve(opponent_seat(), decode_action(opponent_act()));
    res.info.opponent_event = reply;
    if (reply.terminal()) {
      res.rally_done = true;
      res.reward = reply.rally_winner() == agent ? cfg_.reward_win : cfg_.reward_loss;
    }
  }
  if (res.rally_done) pre_resolve_opponent_serves(&res.info.auto_rallies);
  res.game_done = score_.game_over;
  res.info.score = score_;
  res.observation = observation_for(agent);
  return res;
}

StepResult Env::step_two_agent(const Action& a) {
  if (score_.game_over) throw StateError("game is over; call reset()");
  const PlayerId hitter = to_act_;
  StepResult res;
  const RallyEvent ev = resolve(hitter, a);
  res.info.exec_result = ev.exec_result;
  res.info.defense_result = ev.defense_result;
  if (ev.terminal()) {
    res.rally_done = true;
    res.reward = ev.rally_winner() == hitter ? cfg_.reward_win : cfg_.reward_loss;
  }
  res.game_done = score_.game_over;
  res.info.score = score_;
  res.observation = observation_for(to_act_);
  return res;
}

GameRecord play_game(const Policy& policy_a, const Policy& policy_b, EnvConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  Env env(std::move(cfg));
  env.reset_two_agent(seed);
  while (!env.game_done()) {
    const PlayerId p = env.to_act();
    const Policy& policy = p == PlayerId::P0 ? policy_a : policy_b;
    const Observation obs = env.observation_for(p);
    const int a = policy.act_index(PolicyInput{obs, env.context(), p}, env.rng());
    env.step_two_agent(decode_action(a));
  }
  GameRecord g;
  g.rallies = env.rallies();
  g.final_score = env.score();
  g.winner = *env.score().winner;
  return g;
}

void to_json(Json& j, const GameRecord& g) {
  j = Json{{"rallies", g.rallies}, {"final_score", g.final_score}, {"winner", g.winner}};
}

}  // namespace shuttle
