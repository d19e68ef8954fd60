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

#include "shuttle/server.hpp"

#include <httplib.h>

#include "shuttle/error.hpp"

namespace shuttle {

namespace {

int status_for(const Error& e) {
  if (e.code() == "not_found") return 404;
  if (e.code() == "state") return 409;
  return 400;
}

void reply(httplib::Response& res, const proto::Message& m, int status = 200) {
  res.status = status;
  res.set_content(proto::to_message(m).dump(), "application/json");
}

void fail(httplib::Response& res, const std::string& code, const std::string& message, int status) {
  reply(res, proto::ErrorMessage{code, message}, status);
}

// Bodies may omit "type"; the endpoint implies it.
template <class T>
T body_as(const httplib::Request& req, const char* type) {
  Json j = req.body.empty() ? Json::object() : Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("request body is not valid JSON");
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  if (!j.contains("type")) j["type"] = type;
  return proto::parse_as<T>(j);
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      fail(res, e.code(), e.what(), status_for(e));
    } catch (const std::exception& e) {
      fail(res, "internal", e.what(), 500);
    }
  };
}

std::string sse_frame(const proto::Event& e) {
  const Json j = proto::event_json(e);
  return "id: " + std::to_string(std::visit([](const auto& v) { return v.seq; }, e)) + "\nevent: " +
         j.at("type").get<std::string>() + "\ndata: " + j.dump() + "\n\n";
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<SessionManager> sessions, ServerOptions opts)
    : sessions_(std::move(sessions)), opts_(std::move(opts)), http_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *http_;
  auto sm = sessions_;

  s.Post("/sessions", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->create_session(body_as<proto::CreateSessionRequest>(req, "create_session")), 201);
  }));
  s.Get("/sessions", guarded([sm](const httplib::Request&, httplib::Response& res) { reply(res, sm->list_sessions()); }));
  s.Get(R"(/sessions/([^/]+))", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->get_session(req.matches[1]));
  }));
  s.Post(R"(/sessions/([^/]+)/advance)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->advance(req.matches[1], body_as<proto::AdvanceRequest>(req, "advance").steps));
  }));
  s.Post(R"(/sessions/([^/]+)/action)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    const auto r = body_as<proto::SubmitActionRequest>(req, "submit_action");
    reply(res, sm->submit_action(req.matches[1], r.seat, r.action));
  }));
  s.Post(R"(/sessions/([^/]+)/switch)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    const auto r = body_as<proto::SwitchAgentRequest>(req, "switch_agent");
    reply(res, sm->switch_agent(req.matches[1], r.seat, r.checkpoint_id));
  }));
  s.Post(R"(/sessions/([^/]+)/replay)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    const auto r = body_as<proto::ReplayRequest>(req, "replay");
    reply(res, sm->replay(req.matches[1], r.from_rally, r.count));
  }));
  s.Post(R"(/sessions/([^/]+)/pause)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->pause(req.matches[1]));
  }));
  s.Post(R"(/sessions/([^/]+)/resume)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->resume(req.matches[1]));
  }));
  s.Post(R"(/sessions/([^/]+)/close)", guarded([sm](const httplib::Request& req, httplib::Response& res) {
    reply(res, sm->close(req.matches[1]));
  }));
  s.Get("/checkpoints", guarded([sm](const httplib::Request&, httplib::Response& res) { reply(res, sm->catalog().list()); }));

  const auto poll = std::chrono::milliseconds(opts_.stream_poll_ms);
  auto* stopping = &stopping_;
  s.Get(R"(/sessions/([^/]+)/events)", guarded([sm, poll, stopping](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    (void)sm->get_session(id);  // 404 before committing to a stream
    std::int64_t from = 0;
    if (req.has_param("from")) from = std::stoll(req.get_param_value("from"));
    auto cursor = std::make_shared<std::int64_t>(std::max<std::int64_t>(from, 0));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [sm, id, cursor, poll, stopping](std::size_t, httplib::DataSink& sink) {
      if (stopping->load()) {
        sink.done();
        return true;
      }
      const auto events = sm->wait_events(id, *cursor, poll);
      if (!events) {
        sink.done();
        return true;
      }
      if (events->empty()) {
        const std::string ping = ": keep-alive\n\n";
        return sink.write(ping.data(), ping.size());
      }
      for (const auto& e : *events) {
        const std::string frame = sse_frame(e);
        if (!sink.write(frame.data(), frame.size())) return false;
        ++*cursor;
      }
      return true;
    });
  }));

  if (opts_.static_dir) s.set_mount_point("/", opts_.static_dir->string());
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  if (!http_->bind_to_port(host, port)) throw StateError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() {
  if (opts_.tick_ms > 0 && !ticker_.joinable()) {
    ticker_ = std::thread([this] {
      while (!stopping_.load()) {
        sessions_->tick();
        std::this_thread::sleep_for(std::chrono::milliseconds(opts_.tick_ms));
      }
    });
  }
  http_->listen_after_bind();
}

void HttpServer::stop() {
  stopping_.store(true);
  if (http_) http_->stop();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace shuttle
