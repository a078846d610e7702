// Copyright 2026 The TLR Authors
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

#include "tlr/curation_server.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tlr/error.hpp"

namespace tlr {

using nlohmann::json;

namespace {

int status_for(const Error& e) {
  const std::string& c = e.code();
  if (c == "unknown_candidate" || c == "frame_not_found") return 404;
  if (c == "pending_remain" || c == "session_locked") return 409;
  if (c == "invalid_group" || c == "invalid_decision" || c == "point_index_out_of_range" || c == "invalid_map")
    return 422;
  if (c == "parse_error" || c == "invalid_argument") return 400;
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  json body;
  try {
    body = json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("request body is not JSON: ") + e.what());
  }
  if (!body.is_object()) throw ParseError(0, "request body must be a JSON object");
  return body;
}

std::string actor_of(const httplib::Request& req) {
  const std::string a = req.get_header_value("X-Actor");
  return a.empty() ? "operator" : a;
}

}  // namespace

struct CurationServer::Impl {
  CurationSession& session;
  httplib::Server http;
  std::thread worker;

  explicit Impl(CurationSession& s) : session(s) {
    // The library default adds SO_REUSEPORT, which lets a second editor bind
    // the same port silently.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    routes();
  }

  json candidate_json(const TLCandidate& c) const {
    json j = to_json(c);
    if (auto t = session.overlay_frame(c))
      j["overlay"] = "/api/v1/frames/" + json(*t).dump() + "/overlay";
    else
      j["overlay"] = nullptr;
    return j;
  }

  // Every handler runs through here so that toolkit errors map onto the wire
  // format in one place.
  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, status_for(e), e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "parse_error", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    http.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    http.Get("/api/v1/candidates", guarded([this](const httplib::Request&, httplib::Response& res) {
               json out = json::array();
               for (const auto& c : session.list_candidates()) out.push_back(candidate_json(c));
               send_json(res, 200, {{"route_id", session.route_id()}, {"candidates", out}});
             }));

    // Registered before the {id} routes so "manual" is not taken for an id.
    http.Post("/api/v1/candidates/manual", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("t") || !body["t"].is_number())
                  throw ParseError(0, "field 't' must be a number");
                if (!body.contains("point_index") || !body["point_index"].is_number_integer())
                  throw ParseError(0, "field 'point_index' must be an integer");
                const auto idx = body["point_index"].get<long long>();
                if (idx < 0) throw PointIndexOutOfRange("point_index must be non-negative");
                const TLCandidate c = session.manual_candidate(body["t"].get<double>(),
                                                               static_cast<std::size_t>(idx),
                                                               actor_of(req));
                send_json(res, 201, candidate_json(c));
              }));

    http.Get(R"(/api/v1/candidates/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, candidate_json(session.candidate(req.matches[1])));
             }));

    http.Post(R"(/api/v1/candidates/([^/]+)/decision)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const std::string d = body.value("decision", std::string());
                if (d != "accept" && d != "reject")
                  throw InvalidDecision("decision must be \"accept\" or \"reject\"");
                std::optional<std::string> group;
                if (body.contains("group") && !body["group"].is_null()) {
                  if (!body["group"].is_string()) throw InvalidGroup("group must be a string or null");
                  group = body["group"].get<std::string>();
                }
                std::vector<std::string> relevant;
                if (body.contains("relevant_for")) relevant = body["relevant_for"].get<std::vector<std::string>>();
                const TLCandidate c =
                    session.decide(req.matches[1], d == "accept" ? Decision::Accept : Decision::Reject, group,
                                   relevant, actor_of(req));
                send_json(res, 200, candidate_json(c));
              }));

    http.Get(R"(/api/v1/frames/([^/]+)/overlay)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string raw = req.matches[1];
               char* end = nullptr;
               const double t = std::strtod(raw.c_str(), &end);
               if (end == raw.c_str() || *end != '\0') throw FrameNotFound("bad frame time '" + raw + "'");
               const auto png = session.overlay_png(t);
               res.status = 200;
               res.set_content(std::string(png.begin(), png.end()), "image/png");
             }));

    http.Post("/api/v1/save", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const bool force = body.value("force", false);
                const SaveResult r = session.save(force, actor_of(req));
                send_json(res, 200, {{"map", to_json(r.map)}, {"dropped_pending", r.dropped_pending}});
              }));

    http.Get("/api/v1/map", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, to_json(session.draft_map()));
             }));

    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "not_found", "no such endpoint");
    });
  }
};

CurationServer::CurationServer(CurationSession& session) : impl_(std::make_unique<Impl>(session)) {}

CurationServer::~CurationServer() { stop(); }

int CurationServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0)
    bound = impl_->http.bind_to_any_port(host);
  else if (!impl_->http.bind_to_port(host, port))
    bound = -1;
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void CurationServer::serve() { impl_->http.listen_after_bind(); }

int CurationServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->worker = std::thread([this] { serve(); });
  impl_->http.wait_until_ready();
  return bound;
}

void CurationServer::stop() {
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace tlr
