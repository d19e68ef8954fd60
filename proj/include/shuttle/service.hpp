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

// In-memory session service: environments stepped one shot at a time,
// agent or human seats, live agent switching and log replay. Thread-safe;
// commands on one session are serialized by that session's mutex.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "shuttle/env.hpp"
#include "shuttle/policy.hpp"
#include "shuttle/protocol.hpp"

namespace shuttle {

class CheckpointCatalog {
 public:
  void add(const std::string& id, PolicyHandle policy);
  // Registers every policy checkpoint (*.json) in dir under its file stem.
  // Files that are not policy checkpoints are skipped. Returns the count.
  int load_dir(const std::filesystem::path& dir);
  PolicyHandle get(const std::string& id) const;  // throws NotFoundError
  proto::CheckpointList list() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, PolicyHandle> policies_;
};

struct ServiceOptions {
  // When set, closing a session writes <dir>/<session_id>.json.
  std::optional<std::filesystem::path> snapshot_dir;
};

class SessionManager {
 public:
  explicit SessionManager(std::shared_ptr<CheckpointCatalog> catalog, ServiceOptions opts = {});
  ~SessionManager();

  void add_env_config(const std::string& id, EnvConfig cfg);
  CheckpointCatalog& catalog() { return *catalog_; }

  proto::SessionView create_session(const proto::CreateSessionRequest& req);
  proto::SessionView get_session(const std::string& id) const;
  proto::SessionList list_sessions() const;

  proto::EventsMessage advance(const std::string& id, int steps);
  proto::EventsMessage submit_action(const std::string& id, PlayerId seat, const Action& action);
  proto::Ack switch_agent(const std::string& id, PlayerId seat, const std::string& checkpoint_id);
  proto::EventsMessage replay(const std::string& id, int from_rally, int count = 1) const;
  proto::Ack pause(const std::string& id);
  proto::Ack resume(const std::string& id);
  proto::Ack close(const std::string& id);

  // Advances every running session by one shot (skipping sessions waiting
  // on a human or finished). Returns the number of sessions advanced.
  int tick();

  // Blocks until the log holds entries at or after `cursor`, the session
  // closes, or the timeout passes. Returns nullopt once the session is
  // closed and everything before the close has been delivered.
  std::optional<std::vector<proto::Event>> wait_events(const std::string& id, std::int64_t cursor,
                                                       std::chrono::milliseconds timeout) const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;

  std::shared_ptr<CheckpointCatalog> catalog_;
  ServiceOptions opts_;
  mutable std::shared_mutex mu_;
  std::map<std::string, EnvConfig> envs_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace shuttle
