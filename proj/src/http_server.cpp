#include "langnav/http_server.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>

#include "langnav/error.hpp"

namespace langnav {

using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownAsset:
      return 404;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

json error_body(std::string_view code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::Parse, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad JSON body: ") + e.what());
  }
}

template <class T>
T field(const json& body, const char* key, T fallback) {
  if (!body.contains(key)) return fallback;
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "' has the wrong type");
  }
}

// Wraps a handler so library errors become {"error": {...}} responses.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_json(res, error_body(error_code_name(e.code()), e.what()), http_status(e.code()));
    } catch (const std::exception& e) {
      send_json(res, error_body("internal", e.what()), 500);
    }
  };
}

std::string mode_name(RunMode m) { return m == RunMode::Realtime ? "realtime" : "paused"; }

}  // namespace

struct HttpServer::Impl {
  SessionManager& sessions;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  explicit Impl(SessionManager& s) : sessions(s) { routes(); }

  void routes() {
    server.Get("/assets", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto& a = sessions.assets();
      json maps = json::array(), models = json::array();
      for (const auto& [id, _] : a.maps) maps.push_back(id);
      for (const auto& [id, _] : a.models) models.push_back(id);
      send_json(res, {{"maps", maps}, {"models", models}});
    }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto map = field<std::string>(body, "map", "");
      const auto model = field<std::string>(body, "model", "");
      const json config = body.contains("config") ? body.at("config") : json::object();
      const auto seed = field<std::uint64_t>(body, "seed", 1);
      auto s = sessions.create(map, model, config, seed);
      send_json(res, {{"id", s->id()}, {"tick", s->snapshot()->tick}}, 201);
    }));

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"sessions", sessions.ids()}});
    }));

    server.Delete(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!sessions.remove(id)) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
      send_json(res, {{"id", id}, {"deleted", true}});
    }));

    server.Post(R"(/sessions/([^/]+)/instruction)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto s = sessions.get(req.matches[1]);
                  const auto body = body_of(req);
                  if (!body.contains("text")) throw Error(ErrorCode::Parse, "missing field 'text'");
                  const auto ev = s->submit_instruction(field<std::string>(body, "text", ""));
                  send_json(res, ev.to_json(), ev.ok ? 200 : 422);
                }));

    server.Post(R"(/sessions/([^/]+)/tick)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = sessions.get(req.matches[1]);
      const auto body = body_of(req);
      const int n = field<int>(body, "n", 1);
      if (s->mode() == RunMode::Realtime) throw Error(ErrorCode::InvalidConfig, "session is running in realtime");
      s->tick(n);
      send_json(res, {{"tick", s->snapshot()->tick}});
    }));

    server.Post(R"(/sessions/([^/]+)/mode)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = sessions.get(req.matches[1]);
      const auto body = body_of(req);
      const auto mode = field<std::string>(body, "mode", "");
      if (mode == "paused") {
        s->set_mode(RunMode::Paused);
      } else if (mode == "stepping") {
        // runs the requested steps, then stays paused
        s->set_mode(RunMode::Paused);
        s->tick(field<int>(body, "steps", 1));
      } else if (mode == "realtime") {
        s->set_mode(RunMode::Realtime, field<double>(body, "hz", 10.0));
      } else {
        throw Error(ErrorCode::InvalidConfig, "mode must be paused, stepping or realtime");
      }
      send_json(res, {{"mode", mode_name(s->mode())}, {"tick", s->snapshot()->tick}});
    }));

    server.Get(R"(/sessions/([^/]+)/snapshot)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = sessions.get(req.matches[1]);
      auto doc = s->snapshot()->doc;
      doc["mode"] = mode_name(s->mode());
      send_json(res, doc);
    }));

    server.Get(R"(/sessions/([^/]+)/costmap)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, sessions.get(req.matches[1])->costmap());
    }));

    server.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, {{"events", sessions.get(req.matches[1])->events()}});
    }));

    server.Get(R"(/sessions/([^/]+)/stream)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = sessions.get(req.matches[1]);
      long max = -1;
      if (req.has_param("max")) {
        try {
          max = std::stol(req.get_param_value("max"));
        } catch (const std::exception&) {
          throw Error(ErrorCode::Parse, "max must be an integer");
        }
      }
      auto sub = s->subscribe();
      auto sent = std::make_shared<long>(0);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub, sent, max](size_t, httplib::DataSink& sink) {
            while (!stopping && (max < 0 || *sent < max)) {
              auto snap = sub->pop(std::chrono::milliseconds(200));
              if (!snap) {
                if (sub->closed()) break;
                if (!sink.is_writable()) return false;
                continue;
              }
              const auto msg = "event: snapshot\nid: " + std::to_string((*snap)->tick) +
                               "\ndata: " + (*snap)->doc.dump() + "\n\n";
              if (!sink.write(msg.data(), msg.size())) return false;
              ++*sent;
            }
            sink.done();
            return true;
          },
          [s, sub](bool) { s->unsubscribe(sub); });
    }));
  }
};

HttpServer::HttpServer(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
}

std::string bind_address_from_env(const std::string& fallback) {
  const char* v = std::getenv("LANGNAV_BIND");
  return v && *v ? std::string(v) : fallback;
}

int port_from_env(int fallback) {
  const char* v = std::getenv("LANGNAV_PORT");
  if (!v || !*v) return fallback;
  try {
    const int p = std::stoi(v);
    if (p < 0 || p > 65535) throw std::out_of_range("port");
    return p;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("LANGNAV_PORT must be a port number, got '") + v + "'");
  }
}

}  // namespace langnav
