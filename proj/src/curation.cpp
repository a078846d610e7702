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

#include "tlr/curation.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "tlr/error.hpp"
#include "tlr/overlay.hpp"

namespace tlr {

using nlohmann::json;

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration_cast<duration<double>>(system_clock::now().time_since_epoch()).count();
}

bool valid_group_id(const std::string& g) {
  if (g.empty() || g.size() > 64 || g.rfind("g_", 0) == 0) return false;
  return std::all_of(g.begin(), g.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.' || c == ':';
  });
}

bool pid_alive(long pid) { return pid > 0 && (::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM); }

void acquire_lock(const std::filesystem::path& lock) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid());
      [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    if (errno != EEXIST) throw IoError("cannot create lock " + lock.string());
    long holder = 0;
    if (std::FILE* f = std::fopen(lock.c_str(), "r")) {
      if (std::fscanf(f, "%ld", &holder) != 1) holder = 0;
      std::fclose(f);
    }
    if (pid_alive(holder)) break;
    std::filesystem::remove(lock);  // stale, owner is gone
  }
  throw SessionLocked("another curation session is editing " + lock.string());
}

}  // namespace

json to_json(const DecisionEvent& e) {
  return {{"timestamp", e.timestamp}, {"actor", e.actor}, {"action", e.action}, {"payload", e.payload}};
}

DecisionEvent decision_event_from_json(const json& j) {
  if (!j.is_object() || !j.contains("action") || !j.contains("payload"))
    throw ParseError(0, "decision event needs action and payload");
  DecisionEvent e;
  e.timestamp = j.value("timestamp", 0.0);
  e.actor = j.value("actor", std::string("operator"));
  e.action = j.at("action").get<std::string>();
  e.payload = j.at("payload");
  return e;
}

CurationSession::CurationSession(CandidateSet initial, CurationOptions options)
    : options_(std::move(options)), candidates_(std::move(initial.candidates)) {
  if (options_.route_id.empty()) options_.route_id = initial.route_id;
  for (const auto& c : candidates_)
    if (c.manual) ++manual_count_;

  if (options_.map_path) {
    lock_path_ = options_.map_path->string() + ".lock";
    acquire_lock(*lock_path_);
  }
  try {
    if (options_.journal_path) {
      if (std::ifstream in(*options_.journal_path); in) {
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
          ++n;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          json j;
          try {
            j = json::parse(line);
          } catch (const json::parse_error& e) {
            throw ParseError(n, std::string("journal: ") + e.what());
          }
          DecisionEvent e = decision_event_from_json(j);
          apply(e);
          events_.push_back(std::move(e));
        }
      }
      journal_.open(*options_.journal_path, std::ios::app);
      if (!journal_) throw IoError("cannot open journal " + options_.journal_path->string());
    }
  } catch (...) {
    if (lock_path_) std::filesystem::remove(*lock_path_);
    throw;
  }
}

CurationSession::~CurationSession() {
  if (lock_path_) {
    std::error_code ec;
    std::filesystem::remove(*lock_path_, ec);
  }
}

TLCandidate* CurationSession::find(const std::string& id) {
  for (auto& c : candidates_)
    if (c.id == id) return &c;
  return nullptr;
}

const LogFrame* CurationSession::find_frame(double t) const {
  if (!options_.log) return nullptr;
  const auto& log = *options_.log;
  auto it = std::lower_bound(log.begin(), log.end(), t - 1e-6, [](const LogFrame& f, double v) { return f.t < v; });
  if (it != log.end() && std::abs(it->t - t) <= 1e-6) return &*it;
  return nullptr;
}

std::vector<TLCandidate> CurationSession::list_candidates() const {
  std::shared_lock lock(mutex_);
  auto out = candidates_;
  std::stable_sort(out.begin(), out.end(), [](const TLCandidate& a, const TLCandidate& b) {
    if (a.source_frame_range.first != b.source_frame_range.first)
      return a.source_frame_range.first < b.source_frame_range.first;
    return a.id < b.id;
  });
  return out;
}

TLCandidate CurationSession::candidate(const std::string& id) const {
  std::shared_lock lock(mutex_);
  for (const auto& c : candidates_)
    if (c.id == id) return c;
  throw UnknownCandidate("no candidate '" + id + "'");
}

TLCandidate CurationSession::apply_decide(const std::string& id, Decision decision,
                                          const std::optional<std::string>& group,
                                          const std::vector<std::string>& relevant_for) {
  TLCandidate* c = find(id);
  if (!c) throw UnknownCandidate("no candidate '" + id + "'");
  if (group && !valid_group_id(*group))
    throw InvalidGroup("group id '" + *group + "' is invalid (1-64 of [A-Za-z0-9_.:-], prefix g_ is reserved)");
  if (group && decision == Decision::Reject) throw InvalidGroup("a rejected candidate cannot join a group");

  c->status = decision == Decision::Accept ? CandidateStatus::Accepted : CandidateStatus::Rejected;
  c->group_id = decision == Decision::Accept ? group : std::nullopt;
  c->relevant_for = relevant_for;
  if (decision == Decision::Accept && c->relevant_for.empty()) c->relevant_for.push_back(options_.route_id);
  std::sort(c->relevant_for.begin(), c->relevant_for.end());
  c->relevant_for.erase(std::unique(c->relevant_for.begin(), c->relevant_for.end()), c->relevant_for.end());
  return *c;
}

TLCandidate CurationSession::apply_manual(double t, std::size_t point_index) {
  const LogFrame* frame = find_frame(t);
  if (!frame) throw FrameNotFound("no frame at t=" + std::to_string(t));
  if (point_index >= frame->lidar.size())
    throw PointIndexOutOfRange("frame at t=" + std::to_string(t) + " has " + std::to_string(frame->lidar.size()) +
                               " points, index " + std::to_string(point_index) + " requested");
  TLCandidate c;
  char id[32];
  std::snprintf(id, sizeof id, "m%04zu", ++manual_count_);
  c.id = id;
  c.centroid = transform_point(RigidTransform::from_pose(frame->pose), frame->lidar[point_index]);
  c.support = 1;
  c.source_frame_range = {frame->t, frame->t};
  c.manual = true;
  candidates_.push_back(c);
  return c;
}

void CurationSession::apply(const DecisionEvent& e) {
  const json& p = e.payload;
  if (e.action == "decide") {
    const std::string d = p.at("decision").get<std::string>();
    std::optional<std::string> group;
    if (p.contains("group") && !p["group"].is_null()) group = p["group"].get<std::string>();
    apply_decide(p.at("candidate").get<std::string>(), d == "accept" ? Decision::Accept : Decision::Reject, group,
                 p.value("relevant_for", std::vector<std::string>{}));
  } else if (e.action == "manual") {
    apply_manual(p.at("t").get<double>(), p.at("point_index").get<std::size_t>());
  } else if (e.action != "save") {
    throw ParseError(0, "unknown decision action '" + e.action + "'");
  }
}

void CurationSession::record(DecisionEvent e) {
  if (journal_.is_open()) {
    journal_ << to_json(e).dump() << '\n';
    journal_.flush();
  }
  events_.push_back(std::move(e));
}

TLCandidate CurationSession::decide(const std::string& id, Decision decision, const std::optional<std::string>& group,
                                    const std::vector<std::string>& relevant_for, const std::string& actor) {
  std::unique_lock lock(mutex_);
  TLCandidate out = apply_decide(id, decision, group, relevant_for);
  json payload = {{"candidate", id},
                  {"decision", decision == Decision::Accept ? "accept" : "reject"},
                  {"group", group ? json(*group) : json(nullptr)},
                  {"relevant_for", relevant_for}};
  record({now_seconds(), actor, "decide", std::move(payload)});
  return out;
}

TLCandidate CurationSession::manual_candidate(double t, std::size_t point_index, const std::string& actor) {
  std::unique_lock lock(mutex_);
  TLCandidate out = apply_manual(t, point_index);
  record({now_seconds(), actor, "manual", {{"t", t}, {"point_index", point_index}, {"candidate", out.id}}});
  return out;
}

PriorMap CurationSession::build_map() const {
  PriorMap map;
  map.route_id = options_.route_id;
  std::map<std::string, std::vector<std::string>> explicit_groups;
  std::vector<MapLight> ungrouped;
  for (const auto& c : candidates_) {
    if (c.status != CandidateStatus::Accepted) continue;
    if (std::find(c.relevant_for.begin(), c.relevant_for.end(), options_.route_id) == c.relevant_for.end()) continue;
    MapLight light{c.id, c.centroid, c.relevant_for};
    map.lights.push_back(light);
    if (c.group_id)
      explicit_groups[*c.group_id].push_back(c.id);
    else
      ungrouped.push_back(std::move(light));
  }
  std::sort(map.lights.begin(), map.lights.end(), [](const MapLight& a, const MapLight& b) { return a.id < b.id; });
  for (auto& [gid, ids] : explicit_groups) {
    std::sort(ids.begin(), ids.end());
    map.groups.push_back({gid, ids});
  }
  for (auto& g : link_groups(ungrouped, options_.link_radius)) map.groups.push_back(std::move(g));
  std::sort(map.groups.begin(), map.groups.end(), [](const TLGroup& a, const TLGroup& b) { return a.id < b.id; });
  return map;
}

PriorMap CurationSession::draft_map() const {
  std::shared_lock lock(mutex_);
  return build_map();
}

SaveResult CurationSession::save(bool force, const std::string& actor) {
  std::unique_lock lock(mutex_);
  const auto pending = static_cast<std::size_t>(std::count_if(
      candidates_.begin(), candidates_.end(), [](const TLCandidate& c) { return c.status == CandidateStatus::Pending; }));
  if (pending > 0 && !force)
    throw PendingRemain(std::to_string(pending) + " candidate(s) still pending; decide them or save with force");

  SaveResult result{build_map(), pending};
  result.map.validate();
  if (options_.map_path) {
    const auto tmp = options_.map_path->string() + ".tmp";
    save_prior_map(result.map, tmp);
    std::filesystem::rename(tmp, *options_.map_path);
  }
  record({now_seconds(), actor, "save", {{"force", force}, {"dropped_pending", pending}}});
  return result;
}

std::vector<DecisionEvent> CurationSession::decision_log() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::optional<double> CurationSession::overlay_frame(const TLCandidate& c) const {
  if (!options_.log || !options_.camera) return std::nullopt;
  std::optional<double> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& f : *options_.log) {
    if (f.t < c.source_frame_range.first - 1e-6 || f.t > c.source_frame_range.second + 1e-6) continue;
    if (!project_to_image(*options_.camera, world_to_camera(f.pose, *options_.camera).apply(c.centroid))) continue;
    const double d = (f.pose.position - c.centroid).norm();
    if (d < best_d) {
      best_d = d;
      best = f.t;
    }
  }
  if (!best && find_frame(c.source_frame_range.second)) best = c.source_frame_range.second;
  return best;
}

std::vector<unsigned char> CurationSession::overlay_png(double t) const {
  std::shared_lock lock(mutex_);
  const LogFrame* frame = find_frame(t);
  if (!frame || !options_.camera) throw FrameNotFound("no frame at t=" + std::to_string(t));
  return render_overlay_png(*frame, *options_.camera, candidates_);
}

PriorMap CurationSession::replay(const CandidateSet& initial, std::span<const DecisionEvent> events,
                                 const CurationOptions& options) {
  CurationOptions opts = options;
  opts.map_path.reset();
  opts.journal_path.reset();
  CurationSession s(initial, opts);
  std::optional<PriorMap> saved;
  for (const auto& e : events) {
    s.apply(e);
    if (e.action == "save") saved = s.build_map();
  }
  return saved ? *saved : s.build_map();
}

}  // namespace tlr
