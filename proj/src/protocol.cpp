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

#include "shuttle/protocol.hpp"

#include <set>

namespace shuttle::proto {

namespace {

// Pulls fields out of one JSON object and fails on leftovers.
class Reader {
 public:
  Reader(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) throw ValidationError(what_ + ": expected an object");
  }

  template <class T>
  T req(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(what_ + ": missing field '" + key + "'");
    return get<T>(key);
  }

  template <class T>
  T opt(const char* key, T fallback) {
    seen_.insert(key);
    return j_.contains(key) ? get<T>(key) : fallback;
  }

  template <class T>
  std::optional<T> maybe(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    return get<T>(key);
  }

  void skip(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) throw ValidationError(what_ + ": unknown field '" + key + "'");
    }
  }

 private:
  template <class T>
  T get(const char* key) {
    try {
      return j_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ValidationError(what_ + "." + key + ": " + e.what());
    } catch (const ParseError& e) {
      throw ValidationError(what_ + "." + key + ": " + e.what());
    } catch (const ConstraintError& e) {
      throw ValidationError(what_ + "." + key + ": " + e.what());
    }
  }

  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Json seats_json(const Seats& s) { return Json{{"p0", s[0]}, {"p1", s[1]}}; }

Seats parse_seats(const Json& j) {
  Reader r(j, "seats");
  Seats s{r.req<std::string>("p0"), r.req<std::string>("p1")};
  r.finish();
  return s;
}

Json opt_json(const auto& o) { return o ? Json(*o) : Json(nullptr); }

Json score_json(const ScoreView& s) {
  return Json{{"p0", s.points[0]}, {"p1", s.points[1]}, {"server", s.server}, {"game_over", s.game_over},
              {"winner", opt_json(s.winner)}};
}

ScoreView parse_score(const Json& j) {
  Reader r(j, "score");
  ScoreView s;
  s.points = {r.req<int>("p0"), r.req<int>("p1")};
  s.server = r.req<PlayerId>("server");
  s.game_over = r.req<bool>("game_over");
  s.winner = r.maybe<PlayerId>("winner");
  r.finish();
  return s;
}

Action parse_action(const Json& j) {
  Action a;
  try {
    a = j.get<Action>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("action: ") + e.what());
  } catch (const Error& e) {
    throw ValidationError(std::string("action: ") + e.what());
  }
  return a;
}

struct Encoder {
  Json operator()(const CreateSessionRequest& m) const {
    Json j{{"mode", m.mode}, {"seats", seats_json(m.seats)}, {"env_config_id", m.env_config_id}};
    if (m.seed) j["seed"] = *m.seed;
    return j;
  }
  Json operator()(const AdvanceRequest& m) const { return Json{{"steps", m.steps}}; }
  Json operator()(const SubmitActionRequest& m) const { return Json{{"seat", m.seat}, {"action", m.action}}; }
  Json operator()(const SwitchAgentRequest& m) const {
    return Json{{"seat", m.seat}, {"checkpoint_id", m.checkpoint_id}};
  }
  Json operator()(const ReplayRequest& m) const { return Json{{"from_rally", m.from_rally}, {"count", m.count}}; }
  Json operator()(const SessionView& m) const {
    return Json{{"session_id", m.session_id}, {"mode", m.mode},           {"seats", seats_json(m.seats)},
                {"env_config_id", m.env_config_id}, {"seed", m.seed},     {"state", m.state},
                {"score", score_json(m.score)},     {"to_act", m.to_act}, {"rally_index", m.rally_index},
                {"shot_index", m.shot_index},       {"events", m.events}};
  }
  Json operator()(const EventsMessage& m) const {
    Json ev = Json::array();
    for (const auto& e : m.events) ev.push_back(event_json(e));
    return Json{{"session_id", m.session_id}, {"replay", m.replay}, {"events", std::move(ev)}};
  }
  Json operator()(const Ack& m) const {
    return Json{{"session_id", m.session_id}, {"command", m.command}, {"state", m.state}};
  }
  Json operator()(const CheckpointList& m) const {
    Json list = Json::array();
    for (const auto& c : m.checkpoints) {
      list.push_back(Json{{"id", c.id}, {"kind", c.kind}, {"greedy", c.greedy}, {"metadata", c.metadata}});
    }
    return Json{{"checkpoints", std::move(list)}};
  }
  Json operator()(const SessionList& m) const {
    Json list = Json::array();
    for (const auto& s : m.sessions) list.push_back(Json{{"session_id", s.session_id}, {"mode", s.mode}, {"state", s.state}});
    return Json{{"sessions", std::move(list)}};
  }
  Json operator()(const ErrorMessage& m) const { return Json{{"code", m.code}, {"message", m.message}}; }
  Json operator()(const ShotEvent& m) const {
    return Json{{"seq", m.seq},
                {"rally_index", m.rally_index},
                {"shot_index", m.shot_index},
                {"actor", m.actor},
                {"controller", m.controller},
                {"action", m.action},
                {"exec_result", m.exec_result},
                {"defense_result", opt_json(m.defense_result)},
                {"score", score_json(m.score)},
                {"rally_done", m.rally_done},
                {"game_done", m.game_done}};
  }
  Json operator()(const SwitchEvent& m) const {
    return Json{{"seq", m.seq},   {"rally_index", m.rally_index}, {"shot_index", m.shot_index},
                {"seat", m.seat}, {"from", m.from},               {"to", m.to}};
  }
};

struct TypeNamer {
  std::string operator()(const CreateSessionRequest&) const { return "create_session"; }
  std::string operator()(const AdvanceRequest&) const { return "advance"; }
  std::string operator()(const SubmitActionRequest&) const { return "submit_action"; }
  std::string operator()(const SwitchAgentRequest&) const { return "switch_agent"; }
  std::string operator()(const ReplayRequest&) const { return "replay"; }
  std::string operator()(const SessionView&) const { return "session"; }
  std::string operator()(const EventsMessage&) const { return "events"; }
  std::string operator()(const Ack&) const { return "ack"; }
  std::string operator()(const CheckpointList&) const { return "checkpoints"; }
  std::string operator()(const SessionList&) const { return "sessions"; }
  std::string operator()(const ErrorMessage&) const { return "error"; }
  std::string operator()(const ShotEvent&) const { return "shot"; }
  std::string operator()(const SwitchEvent&) const { return "switch"; }
};

bool is_request(const std::string& type) {
  return type == "create_session" || type == "advance" || type == "submit_action" || type == "switch_agent" ||
         type == "replay";
}

Message parse_body(const std::string& type, Reader& r);

Event parse_event(const Json& j) {
  Message m = parse_message(j);
  if (auto* s = std::get_if<ShotEvent>(&m)) return *s;
  if (auto* s = std::get_if<SwitchEvent>(&m)) return *s;
  throw ValidationError("expected an event, got " + type_name(m));
}

Message parse_body(const std::string& type, Reader& r) {
  if (type == "create_session") {
    CreateSessionRequest m;
    m.mode = r.req<std::string>("mode");
    m.seats = parse_seats(r.req<Json>("seats"));
    m.env_config_id = r.opt<std::string>("env_config_id", m.env_config_id);
    m.seed = r.maybe<std::uint64_t>("seed");
    return m;
  }
  if (type == "advance") return AdvanceRequest{r.opt<int>("steps", 1)};
  if (type == "submit_action") return SubmitActionRequest{r.req<PlayerId>("seat"), parse_action(r.req<Json>("action"))};
  if (type == "switch_agent") return SwitchAgentRequest{r.req<PlayerId>("seat"), r.req<std::string>("checkpoint_id")};
  if (type == "replay") return ReplayRequest{r.req<int>("from_rally"), r.opt<int>("count", 1)};
  if (type == "session") {
    SessionView m;
    m.session_id = r.req<std::string>("session_id");
    m.mode = r.req<std::string>("mode");
    m.seats = parse_seats(r.req<Json>("seats"));
    m.env_config_id = r.req<std::string>("env_config_id");
    m.seed = r.req<std::uint64_t>("seed");
    m.state = r.req<std::string>("state");
    m.score = parse_score(r.req<Json>("score"));
    m.to_act = r.req<PlayerId>("to_act");
    m.rally_index = r.req<int>("rally_index");
    m.shot_index = r.req<std::int64_t>("shot_index");
    m.events = r.req<std::int64_t>("events");
    return m;
  }
  if (type == "events") {
    EventsMessage m;
    m.session_id = r.req<std::string>("session_id");
    m.replay = r.opt<bool>("replay", false);
    for (const auto& e : r.req<Json>("events")) m.events.push_back(parse_event(e));
    return m;
  }
  if (type == "ack") return Ack{r.req<std::string>("session_id"), r.req<std::string>("command"), r.req<std::string>("state")};
  if (type == "checkpoints") {
    CheckpointList m;
    for (const auto& c : r.req<Json>("checkpoints")) {
      Reader cr(c, "checkpoint");
      CheckpointInfo info{cr.req<std::string>("id"), cr.req<std::string>("kind"), cr.opt<bool>("greedy", false),
                          cr.opt<Json>("metadata", Json::object())};
      cr.finish();
      m.checkpoints.push_back(std::move(info));
    }
    return m;
  }
  if (type == "sessions") {
    SessionList m;
    for (const auto& s : r.req<Json>("sessions")) {
      Reader sr(s, "session summary");
      SessionSummary sum{sr.req<std::string>("session_id"), sr.req<std::string>("mode"), sr.req<std::string>("state")};
      sr.finish();
      m.sessions.push_back(std::move(sum));
    }
    return m;
  }
  if (type == "error") return ErrorMessage{r.req<std::string>("code"), r.req<std::string>("message")};
  if (type == "shot") {
    ShotEvent m;
    m.seq = r.req<std::int64_t>("seq");
    m.rally_index = r.req<int>("rally_index");
    m.shot_index = r.req<std::int64_t>("shot_index");
    m.actor = r.req<PlayerId>("actor");
    m.controller = r.req<std::string>("controller");
    m.action = parse_action(r.req<Json>("action"));
    m.exec_result = r.req<ExecResult>("exec_result");
    m.defense_result = r.maybe<DefenseResult>("defense_result");
    m.score = parse_score(r.req<Json>("score"));
    m.rally_done = r.req<bool>("rally_done");
    m.game_done = r.req<bool>("game_done");
    return m;
  }
  if (type == "switch") {
    SwitchEvent m;
    m.seq = r.req<std::int64_t>("seq");
    m.rally_index = r.req<int>("rally_index");
    m.shot_index = r.req<std::int64_t>("shot_index");
    m.seat = r.req<PlayerId>("seat");
    m.from = r.req<std::string>("from");
    m.to = r.req<std::string>("to");
    return m;
  }
  throw ValidationError("unknown message type: " + type);
}

}  // namespace

int rally_index_of(const Event& e) {
  return std::visit([](const auto& v) { return v.rally_index; }, e);
}

std::string type_name(const Message& m) { return std::visit(TypeNamer{}, m); }

std::vector<std::string> message_types() {
  return {"create_session", "advance", "submit_action", "switch_agent", "replay", "session", "events",
          "ack",            "checkpoints", "sessions",  "error",        "shot",   "switch"};
}

Json to_message(const Message& m) {
  Json j = std::visit(Encoder{}, m);
  j["protocol"] = kProtocol;
  j["type"] = type_name(m);
  return j;
}

Json event_json(const Event& e) {
  return std::visit([](const auto& v) { return to_message(Message(v)); }, e);
}

Message parse_message(const Json& j) {
  Reader r(j, "message");
  const std::string type = r.req<std::string>("type");
  const auto protocol = r.maybe<std::string>("protocol");
  if (!protocol && !is_request(type)) throw ValidationError("message: missing field 'protocol'");
  if (protocol && *protocol != kProtocol) {
    throw ValidationError("protocol mismatch: expected " + std::string(kProtocol) + ", got " + *protocol);
  }
  Message m = parse_body(type, r);
  r.finish();
  return m;
}

}  // namespace shuttle::proto
