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

// Typed messages of the session protocol. Every message on the wire is a
// JSON object carrying "protocol" and "type"; parse_message/to_message
// convert between the two forms and reject anything off-schema.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shuttle/domain.hpp"
#include "shuttle/error.hpp"

namespace shuttle::proto {

inline constexpr const char* kProtocol = "shuttle-proto/1";

struct ScoreView {
  std::array<int, 2> points{0, 0};
  PlayerId server = PlayerId::P0;
  bool game_over = false;
  std::optional<PlayerId> winner;

  static ScoreView of(const ScoreState& s) { return {s.points, s.server, s.game_over, s.winner}; }
  friend bool operator==(const ScoreView&, const ScoreView&) = default;
};

// Seat controllers are "human" or "agent:<checkpoint-id>".
using Seats = std::array<std::string, 2>;

struct ShotEvent {
  std::int64_t seq = 0;
  int rally_index = 0;
  std::int64_t shot_index = 0;
  PlayerId actor = PlayerId::P0;
  std::string controller;
  Action action;
  ExecResult exec_result = ExecResult::Valid;
  std::optional<DefenseResult> defense_result;
  ScoreView score;  // after the shot
  bool rally_done = false;
  bool game_done = false;
  friend bool operator==(const ShotEvent&, const ShotEvent&) = default;
};

// Logged when a seat changes controller; shot_index is the next shot's.
struct SwitchEvent {
  std::int64_t seq = 0;
  int rally_index = 0;
  std::int64_t shot_index = 0;
  PlayerId seat = PlayerId::P0;
  std::string from;
  std::string to;
  friend bool operator==(const SwitchEvent&, const SwitchEvent&) = default;
};

using Event = std::variant<ShotEvent, SwitchEvent>;

int rally_index_of(const Event& e);

struct CreateSessionRequest {
  std::string mode = "watch";  // watch | play
  Seats seats;
  std::string env_config_id = "default";
  std::optional<std::uint64_t> seed;
  friend bool operator==(const CreateSessionRequest&, const CreateSessionRequest&) = default;
};

struct AdvanceRequest {
  int steps = 1;
  friend bool operator==(const AdvanceRequest&, const AdvanceRequest&) = default;
};

struct SubmitActionRequest {
  PlayerId seat = PlayerId::P0;
  Action action;
  friend bool operator==(const SubmitActionRequest&, const SubmitActionRequest&) = default;
};

struct SwitchAgentRequest {
  PlayerId seat = PlayerId::P0;
  std::string checkpoint_id;
  friend bool operator==(const SwitchAgentRequest&, const SwitchAgentRequest&) = default;
};

struct ReplayRequest {
  int from_rally = 0;
  int count = 1;
  friend bool operator==(const ReplayRequest&, const ReplayRequest&) = default;
};

struct SessionView {
  std::string session_id;
  std::string mode;
  Seats seats;
  std::string env_config_id;
  std::uint64_t seed = 0;
  std::string state;  // running | paused | closed
  ScoreView score;
  PlayerId to_act = PlayerId::P0;
  int rally_index = 0;
  std::int64_t shot_index = 0;
  std::int64_t events = 0;
  friend bool operator==(const SessionView&, const SessionView&) = default;
};

struct EventsMessage {
  std::string session_id;
  bool replay = false;
  std::vector<Event> events;
  friend bool operator==(const EventsMessage&, const EventsMessage&) = default;
};

struct Ack {
  std::string session_id;
  std::string command;
  std::string state;
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct CheckpointInfo {
  std::string id;
  std::string kind;
  bool greedy = false;
  Json metadata = Json::object();
  friend bool operator==(const CheckpointInfo&, const CheckpointInfo&) = default;
};

struct CheckpointList {
  std::vector<CheckpointInfo> checkpoints;
  friend bool operator==(const CheckpointList&, const CheckpointList&) = default;
};

struct SessionSummary {
  std::string session_id;
  std::string mode;
  std::string state;
  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

struct SessionList {
  std::vector<SessionSummary> sessions;
  friend bool operator==(const SessionList&, const SessionList&) = default;
};

struct ErrorMessage {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

using Message = std::variant<CreateSessionRequest, AdvanceRequest, SubmitActionRequest, SwitchAgentRequest,
                             ReplayRequest, SessionView, EventsMessage, Ack, CheckpointList, SessionList,
                             ErrorMessage, ShotEvent, SwitchEvent>;

// Wire type names: "create_session", "advance", "submit_action",
// "switch_agent", "replay", "session", "events", "ack", "checkpoints",
// "sessions", "error", "shot", "switch".
std::string type_name(const Message& m);
std::vector<std::string> message_types();

Json to_message(const Message& m);
// Throws ValidationError on unknown types or keys, missing fields and a
// mismatched protocol tag. Requests may omit "protocol".
Message parse_message(const Json& j);

template <class T>
T parse_as(const Json& j) {
  Message m = parse_message(j);
  if (auto* v = std::get_if<T>(&m)) return std::move(*v);
  throw ValidationError("unexpected message type: " + type_name(m));
}

Json event_json(const Event& e);

}  // namespace shuttle::proto
