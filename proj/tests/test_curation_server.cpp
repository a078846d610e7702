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

#include <filesystem>

#include <unistd.h>

#include "doctest.h"
#include "scenarios.hpp"
#include "tlr/curation_server.hpp"
#include "tlr/error.hpp"
// After Eigen: <resolv.h> defines _res.
#include "httplib.h"

using namespace tlr;
using nlohmann::json;

namespace {

struct Served {
  GeneratedRun run = generate(scenarios::six_lights());
  std::filesystem::path map_path;
  std::unique_ptr<CurationSession> session;
  std::unique_ptr<CurationServer> server;
  std::unique_ptr<httplib::Client> client;

  Served() {
    map_path = std::filesystem::temp_directory_path() / ("tlr_server_" + std::to_string(::getpid()) + ".json");
    std::filesystem::remove(map_path);
    CurationOptions o;
    o.route_id = "six";
    o.map_path = map_path;
    o.log = std::make_shared<const std::vector<LogFrame>>(run.log);
    o.camera = run.truth.camera;
    session = std::make_unique<CurationSession>(scenarios::map_candidates(run), o);
    server = std::make_unique<CurationServer>(*session);
    const int port = server->start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  ~Served() {
    server->stop();
    std::filesystem::remove(map_path);
  }

  httplib::Result post(const std::string& path, const json& body, const std::string& actor = "") {
    httplib::Headers h;
    if (!actor.empty()) h.emplace("X-Actor", actor);
    return client->Post(path, h, body.dump(), "application/json");
  }
};

json body(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST_CASE("curation HTTP API") {
  Served s;
  auto& c = *s.client;

  auto r = c.Get("/api/v1/candidates");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type") == "application/json");
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  json list = body(r);
  CHECK(list["route_id"] == "six");
  REQUIRE(list["candidates"].size() == 6);
  const json first = list["candidates"][0];
  const std::string id = first["id"];
  CHECK(first["status"] == "pending");
  REQUIRE(first["overlay"].is_string());

  SUBCASE("single candidate and overlay") {
    r = c.Get("/api/v1/candidates/" + id);
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body(r)["id"] == id);

    r = c.Get(first["overlay"].get<std::string>());
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "image/png");
    CHECK(r->body.rfind("\x89PNG", 0) == 0);

    r = c.Get("/api/v1/candidates/c9999");
    CHECK(r->status == 404);
    CHECK(body(r)["error"] == "unknown_candidate");
    r = c.Get("/api/v1/frames/-3/overlay");
    CHECK(r->status == 404);
    CHECK(body(r)["error"] == "frame_not_found");
    r = c.Get("/api/v1/frames/abc/overlay");
    CHECK(r->status == 404);
    r = c.Get("/api/v1/nothing");
    CHECK(r->status == 404);
    CHECK(body(r)["error"] == "not_found");
  }

  SUBCASE("decisions") {
    r = s.post("/api/v1/candidates/" + id + "/decision", {{"decision", "accept"}, {"group", "north"}}, "carol");
    REQUIRE(r);
    CHECK(r->status == 200);
    json cj = body(r);
    CHECK(cj["status"] == "accepted");
    CHECK(cj["group"] == "north");
    CHECK(cj["relevant_for"] == json::array({"six"}));
    const auto log = s.session->decision_log();
    REQUIRE(log.size() == 1);
    CHECK(log[0].actor == "carol");

    r = s.post("/api/v1/candidates/" + id + "/decision", {{"decision", "maybe"}});
    CHECK(r->status == 422);
    CHECK(body(r)["error"] == "invalid_decision");
    r = s.post("/api/v1/candidates/" + id + "/decision", {{"decision", "reject"}, {"group", "x"}});
    CHECK(r->status == 422);
    CHECK(body(r)["error"] == "invalid_group");
    r = s.post("/api/v1/candidates/" + id + "/decision", {{"decision", "accept"}, {"group", "g_auto"}});
    CHECK(r->status == 422);
    r = s.post("/api/v1/candidates/c9999/decision", {{"decision", "accept"}});
    CHECK(r->status == 404);
    r = c.Post("/api/v1/candidates/" + id + "/decision", "{not json", "application/json");
    CHECK(r->status == 400);
    CHECK(body(r)["error"] == "parse_error");

    r = c.Get("/api/v1/map");
    REQUIRE(r);
    CHECK(r->status == 200);
    const PriorMap draft = prior_map_from_json(body(r));
    REQUIRE(draft.lights.size() == 1);
    CHECK(draft.groups[0].id == "north");
  }

  SUBCASE("manual candidates") {
    const LogFrame& f = s.run.log.at(200);
    r = s.post("/api/v1/candidates/manual", {{"t", f.t}, {"point_index", 0}});
    REQUIRE(r);
    CHECK(r->status == 201);
    CHECK(body(r)["id"] == "m0001");
    CHECK(body(r)["manual"] == true);
    r = s.post("/api/v1/candidates/manual", {{"t", f.t}, {"point_index", f.lidar.size()}});
    CHECK(r->status == 422);
    CHECK(body(r)["error"] == "point_index_out_of_range");
    r = s.post("/api/v1/candidates/manual", {{"t", f.t}, {"point_index", -1}});
    CHECK(r->status == 422);
    r = s.post("/api/v1/candidates/manual", {{"t", -1.0}, {"point_index", 0}});
    CHECK(r->status == 404);
    r = s.post("/api/v1/candidates/manual", {{"point_index", 0}});
    CHECK(r->status == 400);
  }

  SUBCASE("save") {
    r = s.post("/api/v1/save", json::object());
    REQUIRE(r);
    CHECK(r->status == 409);
    CHECK(body(r)["error"] == "pending_remain");
    CHECK_FALSE(std::filesystem::exists(s.map_path));

    for (const auto& cand : list["candidates"])
      CHECK(s.post("/api/v1/candidates/" + cand["id"].get<std::string>() + "/decision", {{"decision", "accept"}})
                ->status == 200);
    r = s.post("/api/v1/save", json::object());
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body(r)["dropped_pending"] == 0);
    const PriorMap saved = prior_map_from_json(body(r)["map"]);
    CHECK(saved.lights.size() == 6);
    CHECK(saved.groups.size() == 3);
    CHECK(load_prior_map(s.map_path) == saved);
  }

  SUBCASE("CORS preflight") {
    r = c.Options("/api/v1/save");
    REQUIRE(r);
    CHECK(r->status == 204);
    CHECK(r->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
  }
}

TEST_CASE("binding an occupied port fails") {
  CurationSession session(CandidateSet{"r", {}}, CurationOptions{});
  CurationServer a(session);
  const int port = a.bind("127.0.0.1", 0);
  CurationServer b(session);
  CHECK_THROWS_AS(b.bind("127.0.0.1", port), IoError);
}
