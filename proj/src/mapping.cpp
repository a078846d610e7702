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

#include "tlr/mapping.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "tlr/dbscan.hpp"
#include "tlr/error.hpp"

namespace tlr {

using detail::json;

void MappingConfig::validate() const {
  if (flush_gap_frames < 1) throw InvalidArgument("flush_gap_frames must be >= 1");
  if (!(dbscan_eps > 0.0)) throw InvalidArgument("dbscan_eps must be positive");
  if (dbscan_min_pts < 1) throw InvalidArgument("dbscan_min_pts must be >= 1");
  if (!(group_link_radius > 0.0)) throw InvalidArgument("group_link_radius must be positive");
  if (!(tight_bbox_shrink >= 0.0 && tight_bbox_shrink < 1.0))
    throw InvalidArgument("tight_bbox_shrink must lie in [0,1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0,1]");
}

std::string_view to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::Pending: return "pending";
    case CandidateStatus::Accepted: return "accepted";
    case CandidateStatus::Rejected: return "rejected";
  }
  return "pending";
}

std::optional<CandidateStatus> parse_candidate_status(std::string_view s) {
  if (s == "pending") return CandidateStatus::Pending;
  if (s == "accepted") return CandidateStatus::Accepted;
  if (s == "rejected") return CandidateStatus::Rejected;
  return std::nullopt;
}

void accumulate_hits(const LogFrame& frame, std::span<const Detection> dets, const CameraModel& cam,
                     const MappingConfig& cfg, PointBuffer& buffer) {
  if (dets.empty()) {
    ++buffer.gap_counter;
    return;
  }
  buffer.gap_counter = 0;

  std::vector<BoundingBox> boxes;
  boxes.reserve(dets.size());
  for (const auto& d : dets) boxes.push_back(cfg.tight_bbox_shrink > 0.0 ? d.bbox.shrunk(cfg.tight_bbox_shrink) : d.bbox);

  const RigidTransform vehicle_to_camera = cam.extrinsics.inverse();
  const RigidTransform vehicle_to_world = RigidTransform::from_pose(frame.pose);
  bool added = false;
  for (const Vec3& p : frame.lidar) {
    const auto px = project_to_image(cam, vehicle_to_camera.apply(p));
    if (!px) continue;
    const bool hit = std::any_of(boxes.begin(), boxes.end(),
                                 [&](const BoundingBox& b) { return b.contains(px->u, px->v); });
    if (!hit) continue;
    buffer.points.push_back(vehicle_to_world.apply(p));
    added = true;
  }
  if (added) {
    if (buffer.source_frame_range)
      buffer.source_frame_range->second = frame.t;
    else
      buffer.source_frame_range = std::pair{frame.t, frame.t};
  }
}

std::vector<TLCandidate> flush(PointBuffer& buffer, const MappingConfig& cfg) {
  std::vector<TLCandidate> out;
  if (buffer.points.empty()) return out;

  const DbscanResult clusters = dbscan(buffer.points, cfg.dbscan_eps, cfg.dbscan_min_pts);
  const auto range = buffer.source_frame_range.value_or(std::pair{0.0, 0.0});
  for (const auto& members : clusters.clusters) {
    Vec3 sum = Vec3::Zero();
    for (std::size_t i : members) sum += buffer.points[i];
    TLCandidate c;
    c.centroid = sum / static_cast<double>(members.size());
    c.support = members.size();
    c.source_frame_range = range;
    out.push_back(std::move(c));
  }
  buffer.points.clear();
  buffer.source_frame_range.reset();
  return out;
}

std::vector<TLCandidate> maybe_flush(PointBuffer& buffer, const MappingConfig& cfg) {
  if (buffer.gap_counter < cfg.flush_gap_frames || buffer.points.empty()) return {};
  return flush(buffer, cfg);
}

MapBuilder::MapBuilder(CameraModel cam, MappingConfig cfg) : cam_(std::move(cam)), cfg_(cfg) {
  cam_.validate();
  cfg_.validate();
}

void MapBuilder::process(const LogFrame& frame, std::span<const Detection> dets) {
  const auto kept = filter_by_confidence(dets, cfg_.tau);
  accumulate_hits(frame, kept, cam_, cfg_, buffer_);
  adopt(maybe_flush(buffer_, cfg_));
}

std::vector<TLCandidate> MapBuilder::finish() {
  adopt(flush(buffer_, cfg_));
  return candidates_;
}

void MapBuilder::adopt(std::vector<TLCandidate> fresh) {
  for (auto& c : fresh) {
    char id[32];
    std::snprintf(id, sizeof id, "c%04zu", candidates_.size() + 1);
    c.id = id;
    candidates_.push_back(std::move(c));
  }
}

std::vector<TLGroup> link_groups(std::span<const MapLight> lights, double radius) {
  const std::size_t n = lights.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((lights[i].position - lights[j].position).norm() <= radius) parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<std::string>> members;
  for (std::size_t i = 0; i < n; ++i) members[find(i)].push_back(lights[i].id);

  std::vector<TLGroup> groups;
  for (auto& [root, ids] : members) {
    std::sort(ids.begin(), ids.end());
    groups.push_back({"g_" + ids.front(), std::move(ids)});
  }
  std::sort(groups.begin(), groups.end(), [](const TLGroup& a, const TLGroup& b) { return a.id < b.id; });
  return groups;
}

PriorMap transfer_annotations(const PriorMap& map, const std::string& target_route,
                              const std::map<std::string, bool>& overrides,
                              std::span<const std::string> known_routes, double link_radius) {
  if (std::find(known_routes.begin(), known_routes.end(), target_route) == known_routes.end())
    throw UnknownRoute("route '" + target_route + "' is not known");

  PriorMap out;
  out.route_id = target_route;
  for (const MapLight& l : map.lights) {
    bool relevant = std::find(l.relevant_for.begin(), l.relevant_for.end(), target_route) != l.relevant_for.end();
    if (auto it = overrides.find(l.id); it != overrides.end()) relevant = it->second;
    if (!relevant) continue;
    MapLight copy = l;
    if (std::find(copy.relevant_for.begin(), copy.relevant_for.end(), target_route) == copy.relevant_for.end()) {
      copy.relevant_for.push_back(target_route);
      std::sort(copy.relevant_for.begin(), copy.relevant_for.end());
    }
    out.lights.push_back(std::move(copy));
  }
  out.groups = link_groups(out.lights, link_radius);
  return out;
}

json to_json(const TLCandidate& c) {
  return {{"id", c.id},
          {"centroid", detail::to_json(c.centroid)},
          {"support", c.support},
          {"source_frame_range", {c.source_frame_range.first, c.source_frame_range.second}},
          {"status", to_string(c.status)},
          {"group", c.group_id ? json(*c.group_id) : json(nullptr)},
          {"relevant_for", c.relevant_for},
          {"manual", c.manual}};
}

TLCandidate candidate_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "candidate must be an object");
  detail::reject_unknown(j, {"id", "centroid", "support", "source_frame_range", "status", "group", "relevant_for",
                             "manual"},
                         "candidate", 0);
  TLCandidate c;
  c.id = detail::string(detail::field(j, "id", 0), "id", 0);
  c.centroid = detail::vec3(detail::field(j, "centroid", 0), "centroid", 0);
  const json& support = detail::field(j, "support", 0);
  if (!support.is_number_unsigned()) throw ParseError(0, "support must be a non-negative integer");
  c.support = support.get<std::size_t>();
  const json& range = detail::field(j, "source_frame_range", 0);
  if (!range.is_array() || range.size() != 2) throw ParseError(0, "source_frame_range must be [first_t, last_t]");
  c.source_frame_range = {detail::number(range[0], "source_frame_range", 0),
                          detail::number(range[1], "source_frame_range", 0)};
  if (auto it = j.find("status"); it != j.end()) {
    auto s = parse_candidate_status(detail::string(*it, "status", 0));
    if (!s) throw ParseError(0, "status must be pending/accepted/rejected");
    c.status = *s;
  }
  if (auto it = j.find("group"); it != j.end() && !it->is_null()) c.group_id = detail::string(*it, "group", 0);
  if (auto it = j.find("relevant_for"); it != j.end()) {
    if (!it->is_array()) throw ParseError(0, "relevant_for must be an array");
    for (const auto& r : *it) c.relevant_for.push_back(detail::string(r, "relevant_for", 0));
  }
  if (auto it = j.find("manual"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError(0, "manual must be a boolean");
    c.manual = it->get<bool>();
  }
  return c;
}

void save_candidates(const CandidateSet& set, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& c : set.candidates) arr.push_back(to_json(c));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write candidates " + path.string());
  out << json{{"version", 1}, {"route_id", set.route_id}, {"candidates", arr}}.dump(2) << '\n';
}

CandidateSet load_candidates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open candidates " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = detail::parse_document(ss.str(), 0);
  if (!j.is_object()) throw ParseError(0, "candidate file must be a JSON object");
  detail::reject_unknown(j, {"version", "route_id", "candidates"}, "candidate file", 0);
  const json& v = detail::field(j, "version", 0);
  if (!v.is_number_integer() || v.get<int>() != 1) throw VersionMismatch("candidate file version must be 1");
  CandidateSet set;
  set.route_id = detail::string(detail::field(j, "route_id", 0), "route_id", 0);
  const json& cs = detail::field(j, "candidates", 0);
  if (!cs.is_array()) throw ParseError(0, "candidates must be an array");
  std::set<std::string> ids;
  for (const auto& c : cs) {
    set.candidates.push_back(candidate_from_json(c));
    if (!ids.insert(set.candidates.back().id).second)
      throw ParseError(0, "duplicate candidate id '" + set.candidates.back().id + "'");
  }
  return set;
}

PriorMap auto_accept(std::span<const TLCandidate> candidates, const std::string& route_id, double link_radius) {
  PriorMap map;
  map.route_id = route_id;
  for (const auto& c : candidates) map.lights.push_back({c.id, c.centroid, {route_id}});
  map.groups = link_groups(map.lights, link_radius);
  return map;
}

}  // namespace tlr
