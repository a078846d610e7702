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
#include <fstream>
#include <set>

#include <unistd.h>

#include "doctest.h"
#include "scenarios.hpp"
#include "tlr/curation.hpp"
#include "tlr/error.hpp"

using namespace tlr;

namespace {

struct Fixture {
  GeneratedRun run;
  CandidateSet set;
  std::shared_ptr<const std::vector<LogFrame>> log;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.run = generate(scenarios::six_lights());
    out.set = scenarios::map_candidates(out.run);
    out.log = std::make_shared<const std::vector<LogFrame>>(out.run.log);
    return out;
  }();
  return f;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tlr_curation_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::filesystem::remove(p);
  std::filesystem::remove(p.string() + ".lock");
  return p;
}

CurationOptions options(std::optional<std::filesystem::path> map = std::nullopt,
                        std::optional<std::filesystem::path> journal = std::nullopt) {
  CurationOptions o;
  o.route_id = "six";
  o.map_path = std::move(map);
  o.journal_path = std::move(journal);
  o.log = fixture().log;
  o.camera = fixture().run.truth.camera;
  return o;
}

// Candidate nearest to a true light position.
std::string nearest(const std::vector<TLCandidate>& cs, const Vec3& p) {
  const TLCandidate* best = nullptr;
  for (const auto& c : cs)
    if (!best || (c.centroid - p).norm() < (best->centroid - p).norm()) best = &c;
  return best->id;
}

}  // namespace

TEST_CASE("a fresh session lists every mapped candidate as pending") {
  CurationSession s(fixture().set, options());
  const auto cs = s.list_candidates();
  REQUIRE(cs.size() == 6);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(cs[i].status == CandidateStatus::Pending);
    if (i) CHECK(cs[i - 1].source_frame_range.first <= cs[i].source_frame_range.first);
  }
  CHECK(s.draft_map().lights.empty());
  CHECK_THROWS_AS(s.save(false), PendingRemain);
  CHECK(s.save(true).dropped_pending == 6);
}

TEST_CASE("empty candidate set") {
  CurationSession s(CandidateSet{"six", {}}, options());
  CHECK(s.list_candidates().empty());
  const SaveResult r = s.save(false);
  CHECK(r.map.lights.empty());
  CHECK(r.map.groups.empty());
  CHECK(r.map.route_id == "six");
}

TEST_CASE("accept and reject") {
  CurationSession s(fixture().set, options());
  const auto cs = s.list_candidates();
  const auto& lights = fixture().run.truth.map.lights;

  // Accept the two lamps at x=200 without groups; they are 8 m apart and link automatically.
  const std::string al = nearest(cs, lights[0].position), ar = nearest(cs, lights[1].position);
  const TLCandidate a = s.decide(al, Decision::Accept, std::nullopt, {});
  CHECK(a.status == CandidateStatus::Accepted);
  CHECK(a.relevant_for == std::vector<std::string>{"six"});
  s.decide(ar, Decision::Accept, std::nullopt, {"six", "other", "six"});
  CHECK(s.candidate(ar).relevant_for == std::vector<std::string>{"other", "six"});

  // Explicit group for the pair at x=500; reject one at x=800.
  const std::string bl = nearest(cs, lights[2].position), br = nearest(cs, lights[3].position);
  s.decide(bl, Decision::Accept, std::string("B"), {});
  s.decide(br, Decision::Accept, std::string("B"), {});
  const std::string cl = nearest(cs, lights[4].position), cr = nearest(cs, lights[5].position);
  s.decide(cl, Decision::Reject, std::nullopt, {});
  CHECK(s.candidate(cl).status == CandidateStatus::Rejected);

  // A candidate for another route only is accepted but left out of this map.
  s.decide(cr, Decision::Accept, std::nullopt, {"other"});

  const PriorMap m = s.save(false).map;
  CHECK(m.lights.size() == 4);
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[0].id == "B");
  CHECK(m.groups[0].light_ids == std::vector<std::string>{std::min(bl, br), std::max(bl, br)});
  CHECK(m.groups[1].id == "g_" + std::min(al, ar));
  CHECK(m.find_light(cr) == nullptr);

  // Every light sits in exactly one group.
  std::multiset<std::string> members;
  for (const auto& g : m.groups) members.insert(g.light_ids.begin(), g.light_ids.end());
  for (const auto& l : m.lights) CHECK(members.count(l.id) == 1);
  CHECK(members.size() == m.lights.size());

  // Decisions can be revised.
  s.decide(cl, Decision::Accept, std::nullopt, {});
  CHECK(s.draft_map().lights.size() == 5);
  s.decide(al, Decision::Reject, std::nullopt, {});
  CHECK(s.candidate(al).group_id == std::nullopt);
  CHECK(s.draft_map().lights.size() == 4);
}

TEST_CASE("decision validation") {
  CurationSession s(fixture().set, options());
  const std::string id = s.list_candidates().front().id;
  CHECK_THROWS_AS(s.decide("c9999", Decision::Accept, std::nullopt, {}), UnknownCandidate);
  CHECK_THROWS_AS(s.decide(id, Decision::Accept, std::string(""), {}), InvalidGroup);
  CHECK_THROWS_AS(s.decide(id, Decision::Accept, std::string("g_1"), {}), InvalidGroup);
  CHECK_THROWS_AS(s.decide(id, Decision::Accept, std::string("has space"), {}), InvalidGroup);
  CHECK_THROWS_AS(s.decide(id, Decision::Reject, std::string("A"), {}), InvalidGroup);
  CHECK(s.candidate(id).status == CandidateStatus::Pending);
  // Failed decisions leave no trace.
  CHECK(s.decision_log().empty());
}

TEST_CASE("manual candidates") {
  CurationSession s(fixture().set, options());
  const LogFrame& f = fixture().run.log.at(100);
  REQUIRE(f.lidar.size() > 3);
  const TLCandidate m = s.manual_candidate(f.t, 3);
  CHECK(m.id == "m0001");
  CHECK(m.manual);
  CHECK(m.support == 1);
  CHECK(m.status == CandidateStatus::Pending);
  const Vec3 expect = RigidTransform::from_pose(f.pose).apply(f.lidar[3]);
  CHECK((m.centroid - expect).norm() < 1e-12);

  const TLCandidate again = s.manual_candidate(f.t, 3);
  CHECK(again.id == "m0002");
  CHECK(again.centroid == m.centroid);
  CHECK(s.list_candidates().size() == 8);

  CHECK_THROWS_AS(s.manual_candidate(f.t + 0.01, 0), FrameNotFound);
  CHECK_THROWS_AS(s.manual_candidate(f.t, f.lidar.size()), PointIndexOutOfRange);

  CurationOptions no_log = options();
  no_log.log.reset();
  CurationSession bare(fixture().set, no_log);
  CHECK_THROWS_AS(bare.manual_candidate(f.t, 0), FrameNotFound);
}

TEST_CASE("save writes a valid map and the journal replays") {
  const auto map_path = scratch("map.json");
  const auto journal = scratch("map.journal.jsonl");
  PriorMap saved;
  std::vector<DecisionEvent> events;
  {
    CurationSession s(fixture().set, options(map_path, journal));
    for (const auto& c : s.list_candidates()) s.decide(c.id, Decision::Accept, std::nullopt, {}, "alice");
    s.manual_candidate(fixture().run.log[10].t, 0, "bob");
    saved = s.save(true, "alice").map;
    events = s.decision_log();
    CHECK(std::filesystem::exists(map_path.string() + ".lock"));
  }
  CHECK_FALSE(std::filesystem::exists(map_path.string() + ".lock"));
  CHECK_FALSE(std::filesystem::exists(map_path.string() + ".tmp"));
  REQUIRE(events.size() == 8);
  CHECK(events[6].action == "manual");
  CHECK(events[6].actor == "bob");
  CHECK(events[7].payload["dropped_pending"] == 1);

  const PriorMap on_disk = load_prior_map(map_path);
  CHECK(on_disk == saved);
  CHECK(on_disk.lights.size() == 6);
  CHECK(on_disk.groups.size() == 3);

  // Replaying the events over the initial set reproduces the saved map.
  CHECK(CurationSession::replay(fixture().set, events, options()) == saved);
  CHECK(CurationSession::replay(fixture().set, events, options()) ==
        CurationSession::replay(fixture().set, events, options()));

  // Reopening picks up the journal.
  {
    CurationSession s(fixture().set, options(map_path, journal));
    CHECK(s.decision_log().size() == 8);
    CHECK(s.list_candidates().size() == 7);
    CHECK(s.draft_map() == saved);
    CHECK(s.manual_candidate(fixture().run.log[11].t, 0).id == "m0002");
  }
  std::ifstream in(journal);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) {
    ++lines;
    CHECK_NOTHROW(decision_event_from_json(nlohmann::json::parse(l)));
  }
  CHECK(lines == 9);
}

TEST_CASE("single editor per map") {
  const auto map_path = scratch("locked.json");
  {
    CurationSession first(fixture().set, options(map_path));
    CHECK_THROWS_AS(CurationSession(fixture().set, options(map_path)), SessionLocked);
  }
  CHECK_NOTHROW(CurationSession(fixture().set, options(map_path)));

  // A lock left by a process that no longer exists is taken over.
  {
    std::ofstream(map_path.string() + ".lock") << 999999999;
  }
  CHECK_NOTHROW(CurationSession(fixture().set, options(map_path)));
}

TEST_CASE("overlay") {
  CurationSession s(fixture().set, options());
  const TLCandidate c = s.list_candidates().front();
  const auto t = s.overlay_frame(c);
  REQUIRE(t.has_value());
  CHECK(*t >= c.source_frame_range.first);
  CHECK(*t <= c.source_frame_range.second);
  const auto png = s.overlay_png(*t);
  REQUIRE(png.size() > 8);
  CHECK(png[0] == 0x89);
  CHECK(png[1] == 'P');
  CHECK_THROWS_AS(s.overlay_png(-5.0), FrameNotFound);

  CurationOptions no_cam = options();
  no_cam.camera.reset();
  CurationSession blind(fixture().set, no_cam);
  CHECK_FALSE(blind.overlay_frame(c).has_value());
  CHECK_THROWS_AS(blind.overlay_png(*t), FrameNotFound);
}

TEST_CASE("decision events serialize") {
  DecisionEvent e{1.5, "op", "decide", {{"candidate", "c0001"}, {"decision", "accept"}}};
  const DecisionEvent back = decision_event_from_json(to_json(e));
  CHECK(back.actor == "op");
  CHECK(back.action == "decide");
  CHECK(back.payload == e.payload);
  CHECK_THROWS_AS(decision_event_from_json(nlohmann::json::array()), ParseError);
}
