#include "dyscreen/service/http_server.hpp"

#include <httplib.h>

#include "dyscreen/error.hpp"
#include "dyscreen/session_io.hpp"
#include "dyscreen/service/errors.hpp"

namespace dyscreen::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json details = json::object()) {
  send_json(res, status, {{"code", code}, {"message", message}, {"details", std::move(details)}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, "invalid_json", std::string("request body is not JSON: ") + e.what());
  }
}

std::vector<InteractionEvent> parse_events(const json& body) {
  if (!body.is_object() || !body.contains("seq") || !body.contains("events") || !body.at("events").is_array())
    throw ServiceError(400, "invalid_request", "expected {\"seq\": n, \"events\": [...]}");
  std::vector<InteractionEvent> events;
  for (std::size_t i = 0; i < body.at("events").size(); ++i) {
    try {
      events.push_back(event_from_json(body.at("events").at(i)));
    } catch (const DataError& e) {
      throw ServiceError(400, "invalid_event", e.what(), {{"index", i}});
    }
  }
  return events;
}

}  // namespace

struct HttpServer::Impl {
  ScreeningService& sessions;
  ModelRegistry& models;
  HttpOptions options;
  httplib::Server server;

  Impl(ScreeningService& s, ModelRegistry& m, HttpOptions o) : sessions(s), models(m), options(std::move(o)) {}

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Shared authorization check and exception-to-status mapping.
  Handler wrap(Handler inner) {
    return [this, inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      if (!options.api_token.empty() && req.get_header_value("Authorization") != "Bearer " + options.api_token) {
        send_error(res, 401, "unauthorized", "missing or wrong bearer token");
        return;
      }
      try {
        inner(req, res);
      } catch (const ServiceError& e) {
        send_error(res, e.status(), e.code(), e.what(), e.details());
      } catch (const IncompleteSessionError& e) {
        send_error(res, 422, "incomplete_session", e.what(), {{"missing_qids", e.missing_qids()}});
      } catch (const MalformedSessionError& e) {
        send_error(res, 400, "malformed_session", e.what());
      } catch (const ModelFormatError& e) {
        send_error(res, 400, "invalid_model", e.what());
      } catch (const DataError& e) {
        send_error(res, 400, "invalid_request", e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "invalid_request", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.Post("/v1/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto& p = body.contains("participant") ? body.at("participant") : body;
      const auto created = sessions.create_session(participant_from_json(p));
      send_json(res, 201,
                {{"session_id", created.session_id},
                 {"variant", created.variant.label()},
                 {"questions", created.variant.qids()},
                 {"manifest", "/v1/manifest/" + created.variant.label()}});
    }));
    server.Post(R"(/v1/sessions/([^/]+)/events)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto events = parse_events(body);
      const auto seq = body.at("seq");
      if (!seq.is_number_unsigned()) throw ServiceError(400, "invalid_request", "seq must be a non-negative integer");
      const auto ack = sessions.append_events(req.matches[1], seq.get<std::uint64_t>(), events);
      send_json(res, 200, {{"accepted", ack.accepted}, {"duplicate", ack.duplicate}, {"total_events", ack.total_events}});
    }));
    server.Post(R"(/v1/sessions/([^/]+)/finalize)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto r = sessions.finalize(req.matches[1]);
      send_json(res, 200, {{"prediction", prediction_to_json(r.prediction)}, {"features", r.features.values}});
    }));
    server.Post(R"(/v1/sessions/([^/]+)/abandon)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      sessions.abandon(req.matches[1]);
      send_json(res, 200, session_view_to_json(sessions.get(req.matches[1])));
    }));
    server.Get(R"(/v1/sessions/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, session_view_to_json(sessions.get(req.matches[1])));
    }));
    server.Post("/v1/models", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto entry = models.activate(req.body);
      send_json(res, 201, {{"version", entry.version}, {"variant", entry.model->variant.label()}});
    }));
    server.Get("/v1/models/active", wrap([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, models.describe_active());
    }));
    server.Get(R"(/v1/manifest/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<AgeVariant> variant;
      try {
        variant = AgeVariant::parse(req.matches[1].str());
      } catch (const DataError&) {
        throw ServiceError(404, "not_found", "unknown variant '" + req.matches[1].str() + "'");
      }
      send_json(res, 200, sessions.manifest().to_json(*variant));
    }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
    });
  }
};

HttpServer::HttpServer(ScreeningService& sessions, ModelRegistry& models, HttpOptions options)
    : impl_(std::make_unique<Impl>(sessions, models, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace dyscreen::service
