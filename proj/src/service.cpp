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

#include "shuttle/service.hpp"

#include <random>

#include "shuttle/error.hpp"
#include "shuttle/models.hpp"

namespace shuttle {

namespace {

constexpr int kMaxAdvance = 100000;
constexpr const char* kHuman = "human";
constexpr const char* kAgentPrefix = "agent:";

bool is_human(const std::string& controller) { return controller == kHuman; }

std::string checkpoint_of(const std::string& controller) {
  if (controller.rfind(kAgentPrefix, 0) != 0 || controller.size() == std::string_view(kAgentPrefix).size()) {
    throw ValidationError("seat controller must be 'human' or 'agent:<checkpoint-id>', got '" + controller + "'");
  }
  return controller.substr(std::string_view(kAgentPrefix).size());
}

int window_for(const Policy& p, int fallback) {
  if (const auto* mlp = dynamic_cast<const MlpPolicy*>(&p)) return mlp->history_window();
  return fallback;
}

}  // namespace

void CheckpointCatalog::add(const std::string& id, PolicyHandle policy) {
  if (id.empty()) throw ValidationError("checkpoint id must not be empty");
  if (!policy) throw ValidationError("checkpoint " + id + " has no policy");
  std::unique_lock lock(mu_);
  policies_[id] = std::move(policy);
}

int CheckpointCatalog::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw NotFoundError("checkpoint dir not found: " + dir.string());
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    PolicyHandle p;
    try {
      p = load_policy(entry.path());
    } catch (const Error&) {
      continue;
    }
    add(entry.path().stem().string(), std::move(p));
    ++n;
  }
  return n;
}

PolicyHandle CheckpointCatalog::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = policies_.find(id);
  if (it == policies_.end()) throw NotFoundError("unknown checkpoint: " + id);
  return it->second;
}

proto::CheckpointList CheckpointCatalog::list() const {
  std::shared_lock lock(mu_);
  proto::CheckpointList out;
  for (const auto& [id, p] : policies_) out.checkpoints.push_back({id, p->kind(), p->greedy(), p->metadata()});
  return out;
}

struct SessionManager::Session {
  std::string id;
  std::string mode;
  proto::Seats seats;
  std::string env_id;
  std::uint64_t seed = 0;
  std::string state = "paused";
  std::optional<Env> env;
  std::array<PolicyHandle, 2> policies;
  std::array<Rng, 2> rngs;
  std::vector<proto::Event> log;
  std::int64_t shots = 0;
  int rally_index = 0;
  proto::ScoreView final_score;
  PlayerId final_to_act = PlayerId::P0;
  mutable std::mutex mu;
  mutable std::condition_variable cv;

  bool closed() const { return state == "closed"; }

  void require_open() const {
    if (closed()) throw StateError("session " + id + " is closed");
  }

  bool agent_on_turn() const { return policies[index_of(env->to_act())] != nullptr; }

  proto::SessionView view() const {
    proto::SessionView v;
    v.session_id = id;
    v.mode = mode;
    v.seats = seats;
    v.env_config_id = env_id;
    v.seed = seed;
    v.state = state;
    v.score = env ? proto::ScoreView::of(env->score()) : final_score;
    v.to_act = env ? env->to_act() : final_to_act;
    v.rally_index = rally_index;
    v.shot_index = shots;
    v.events = static_cast<std::int64_t>(log.size());
    return v;
  }

  proto::ShotEvent play(const Action& a) {
    const PlayerId actor = env->to_act();
    const StepResult r = env->step_two_agent(a);
    proto::ShotEvent e;
    e.seq = static_cast<std::int64_t>(log.size());
    e.rally_index = rally_index;
    e.shot_index = shots++;
    e.actor = actor;
    e.controller = seats[index_of(actor)];
    e.action = a;
    e.exec_result = r.info.exec_result;
    e.defense_result = r.info.defense_result;
    e.score = proto::ScoreView::of(env->score());
    e.rally_done = r.rally_done;
    e.game_done = r.game_done;
    if (r.rally_done) ++rally_index;
    log.emplace_back(e);
    cv.notify_all();
    return e;
  }

  proto::ShotEvent play_agent() {
    const PlayerId p = env->to_act();
    const Policy& policy = *policies[index_of(p)];
    ObservationOptions opts = env->config().observation;
    opts.history_window = window_for(policy, opts.history_window);
    const Observation obs = build_observation(env->rally_events(), env->score(), p, opts);
    const int idx = policy.act_index(PolicyInput{obs, env->context(), p}, rngs[index_of(p)]);
    return play(decode_action(idx));
  }
};

SessionManager::SessionManager(std::shared_ptr<CheckpointCatalog> catalog, ServiceOptions opts)
    : catalog_(catalog ? std::move(catalog) : std::make_shared<CheckpointCatalog>()), opts_(std::move(opts)) {}

SessionManager::~SessionManager() = default;

void SessionManager::add_env_config(const std::string& id, EnvConfig cfg) {
  cfg.validate(false);
  std::unique_lock lock(mu_);
  envs_[id] = std::move(cfg);
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session: " + id);
  return it->second;
}

proto::SessionView SessionManager::create_session(const proto::CreateSessionRequest& req) {
  if (req.mode != "watch" && req.mode != "play") throw ValidationError("mode must be 'watch' or 'play'");
  std::array<PolicyHandle, 2> policies;
  int humans = 0;
  for (int s = 0; s < 2; ++s) {
    if (is_human(req.seats[s])) {
      ++humans;
    } else {
      policies[s] = catalog_->get(checkpoint_of(req.seats[s]));
    }
  }
  if (req.mode == "watch" && humans != 0) throw ValidationError("watch mode needs two agent seats");
  if (req.mode == "play" && humans != 1) throw ValidationError("play mode needs exactly one human seat");

  auto s = std::make_shared<Session>();
  s->mode = req.mode;
  s->seats = req.seats;
  s->env_id = req.env_config_id;
  s->seed = req.seed ? *req.seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  s->policies = policies;
  s->rngs = {Rng(mix_seed(s->seed, 1)), Rng(mix_seed(s->seed, 2))};

  std::unique_lock lock(mu_);
  auto env = envs_.find(req.env_config_id);
  if (env == envs_.end()) throw NotFoundError("unknown env config: " + req.env_config_id);
  EnvConfig cfg = env->second;
  cfg.seed = s->seed;
  cfg.match_id = "session";
  s->env.emplace(std::move(cfg));
  s->env->reset_two_agent(s->seed);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
  s->id = buf;
  sessions_[s->id] = s;
  return s->view();
}

proto::SessionView SessionManager::get_session(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->view();
}

proto::SessionList SessionManager::list_sessions() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(mu_);
    for (const auto& [_, s] : sessions_) all.push_back(s);
  }
  proto::SessionList out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    out.sessions.push_back({s->id, s->mode, s->state});
  }
  return out;
}

proto::EventsMessage SessionManager::advance(const std::string& id, int steps) {
  if (steps < 1 || steps > kMaxAdvance) throw RangeError("steps must lie in [1, " + std::to_string(kMaxAdvance) + "]");
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  if (s->env->game_done()) throw StateError("game is over");
  if (!s->agent_on_turn()) throw StateError("waiting for the human seat " + std::string(to_string(s->env->to_act())));
  proto::EventsMessage out{s->id, false, {}};
  for (int i = 0; i < steps && !s->env->game_done() && s->agent_on_turn(); ++i) out.events.emplace_back(s->play_agent());
  return out;
}

proto::EventsMessage SessionManager::submit_action(const std::string& id, PlayerId seat, const Action& action) {
  try {
    (void)encode_action(action);
  } catch (const Error& e) {
    throw ValidationError(std::string("illegal action: ") + e.what());
  }
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  if (!is_human(s->seats[index_of(seat)])) throw StateError("seat " + std::string(to_string(seat)) + " is not human");
  if (s->env->game_done()) throw StateError("game is over");
  if (s->env->to_act() != seat) throw StateError("out of turn: " + std::string(to_string(s->env->to_act())) + " to act");
  proto::EventsMessage out{s->id, false, {}};
  proto::ShotEvent last = s->play(action);
  out.events.emplace_back(last);
  while (!last.rally_done && !last.game_done && s->agent_on_turn()) {
    last = s->play_agent();
    out.events.emplace_back(last);
  }
  return out;
}

proto::Ack SessionManager::switch_agent(const std::string& id, PlayerId seat, const std::string& checkpoint_id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  PolicyHandle p = catalog_->get(checkpoint_id);
  const int k = index_of(seat);
  proto::SwitchEvent e;
  e.seq = static_cast<std::int64_t>(s->log.size());
  e.rally_index = s->rally_index;
  e.shot_index = s->shots;
  e.seat = seat;
  e.from = s->seats[k];
  e.to = kAgentPrefix + checkpoint_id;
  s->seats[k] = e.to;
  s->policies[k] = std::move(p);
  if (s->mode == "play" && !is_human(s->seats[0]) && !is_human(s->seats[1])) s->mode = "watch";
  s->log.emplace_back(e);
  s->cv.notify_all();
  return {s->id, "switch", s->state};
}

proto::EventsMessage SessionManager::replay(const std::string& id, int from_rally, int count) const {
  if (count < 1) throw RangeError("replay count must be >= 1");
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  const int available = s->log.empty() ? 0 : proto::rally_index_of(s->log.back()) + 1;
  if (from_rally < 0 || from_rally >= available) {
    throw RangeError("rally " + std::to_string(from_rally) + " not in log (" + std::to_string(available) + " rallies)");
  }
  proto::EventsMessage out{s->id, true, {}};
  for (const auto& e : s->log) {
    const int r = proto::rally_index_of(e);
    if (r >= from_rally && r - from_rally < count) out.events.push_back(e);
  }
  return out;
}

proto::Ack SessionManager::pause(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  s->state = "paused";
  return {s->id, "pause", s->state};
}

proto::Ack SessionManager::resume(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  s->require_open();
  s->state = "running";
  return {s->id, "resume", s->state};
}

proto::Ack SessionManager::close(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->closed()) return {s->id, "close", s->state};
  s->final_score = proto::ScoreView::of(s->env->score());
  s->final_to_act = s->env->to_act();
  s->state = "closed";
  if (opts_.snapshot_dir) {
    Json events = Json::array();
    for (const auto& e : s->log) events.push_back(proto::event_json(e));
    std::filesystem::create_directories(*opts_.snapshot_dir);
    save_json(*opts_.snapshot_dir / (s->id + ".json"),
              Json{{"session", proto::to_message(s->view())}, {"events", std::move(events)}});
  }
  s->env.reset();
  s->policies = {};
  s->cv.notify_all();
  return {s->id, "close", s->state};
}

int SessionManager::tick() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(mu_);
    for (const auto& [_, s] : sessions_) all.push_back(s);
  }
  int n = 0;
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    if (s->state != "running" || s->env->game_done() || !s->agent_on_turn()) continue;
    s->play_agent();
    ++n;
  }
  return n;
}

std::optional<std::vector<proto::Event>> SessionManager::wait_events(const std::string& id, std::int64_t cursor,
                                                                     std::chrono::milliseconds timeout) const {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  const auto ready = [&] { return static_cast<std::int64_t>(s->log.size()) > cursor || s->closed(); };
  s->cv.wait_for(lock, timeout, ready);
  const auto size = static_cast<std::int64_t>(s->log.size());
  if (cursor < size) {
    return std::vector<proto::Event>(s->log.begin() + std::max<std::int64_t>(cursor, 0), s->log.end());
  }
  if (s->closed()) return std::nullopt;
  return std::vector<proto::Event>{};
}

}  // namespace shuttle
