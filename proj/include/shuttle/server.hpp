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

// HTTP binding of the session protocol. Commands are JSON POSTs; each
// session has a server-sent-events stream of its log.

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "shuttle/service.hpp"

namespace httplib {
class Server;
}

namespace shuttle {

struct ServerOptions {
  // Running (resumed) sessions advance one shot per tick; 0 disables.
  int tick_ms = 400;
  // Long-poll interval of the event stream.
  int stream_poll_ms = 250;
  // Mounted at / when set (the browser console bundle).
  std::optional<std::filesystem::path> static_dir;
};

class HttpServer {
 public:
  HttpServer(std::shared_ptr<SessionManager> sessions, ServerOptions opts = {});
  ~HttpServer();

  // port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  void routes();

  std::shared_ptr<SessionManager> sessions_;
  ServerOptions opts_;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<bool> stopping_{false};
  std::thread ticker_;
};

}  // namespace shuttle
