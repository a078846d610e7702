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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "tlr/error.hpp"
#include "tlr/replay.hpp"

namespace tlr {

using detail::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double opt_number(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : detail::number(*it, key, 0);
}

int opt_int(const json& j, const char* key, int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw ParseError(0, std::string(key) + " must be an integer");
  return it->get<int>();
}

bool opt_bool(const json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(0, std::string(key) + " must be a boolean");
  return it->get<bool>();
}

const json& object_field(const json& j, const char* key) {
  const json& v = detail::field(j, key, 0);
  if (!v.is_object()) throw ParseError(0, std::string(key) + " must be an object");
  return v;
}

std::vector<Waypoint> waypoints_from_json(const json& j) {
  if (!j.is_array()) throw ParseError(0, "waypoints must be an array");
  std::vector<Waypoint> out;
  for (const json& w : j) {
    if (!w.is_object()) throw ParseError(0, "waypoint must be an object");
    detail::reject_unknown(w, {"pose", "speed"}, "waypoint", 0);
    out.push_back({detail::pose(detail::field(w, "pose", 0), 0), detail::number(detail::field(w, "speed", 0), "speed", 0)});
  }
  return out;
}

json waypoints_to_json(const std::vector<Waypoint>& wps) {
  json arr = json::array();
  for (const auto& w : wps) arr.push_back({{"pose", detail::to_json(w.pose)}, {"speed", w.speed}});
  return arr;
}

}  // namespace

FinalState ScenarioLight::state_at(double t) const {
  for (const auto& e : schedule)
    if (t >= e.start && t < e.end) return e.state;
  return FinalState::Off;
}

void Scenario::validate() const {
  auto bad = [](const std::string& why) { throw InvalidScenario(why); };
  if (!(frame_rate > 0.0)) bad("frame_rate must be positive");
  if (!(duration >= 0.0)) bad("duration must be non-negative");
  if (path.empty()) bad("path needs at least one waypoint");
  for (const auto& w : path)
    if (!(w.speed >= 0.0) || !w.pose.position.allFinite()) bad("waypoints need finite positions and speeds >= 0");
  if (!(activation_range > 0.0)) bad("activation_range must be positive");
  if (!(label_range > 0.0)) bad("label_range must be positive");
  if (!(head_size.array() > 0.0).all()) bad("head_size must be positive");
  if (lidar.beams < 1 || lidar.azimuth_steps < 1) bad("lidar needs at least one beam and one azimuth step");
  if (!(lidar.vfov_up_deg > lidar.vfov_down_deg) && lidar.beams > 1) bad("lidar vfov_up_deg must exceed vfov_down_deg");
  if (!(lidar.resolution >= 0.0) || !(lidar.max_range > 0.0)) bad("lidar resolution/max_range invalid");
  if (lidar.ground_points < 0 || lidar.poles < 0 || lidar.pole_points < 0) bad("clutter counts must be >= 0");
  if (!(localization.longitudinal >= 0.0) || !(localization.lateral >= 0.0) ||
      !(localization.correlation_time > 0.0))
    bad("localization noise must be non-negative with positive correlation_time");
  try {
    camera.validate();
    detector.validate();
  } catch (const InvalidArgument& e) {
    bad(e.what());
  }
  std::set<std::string> ids;
  for (const auto& l : lights) {
    if (l.id.empty()) bad("light id must not be empty");
    if (!ids.insert(l.id).second) bad("duplicate light id '" + l.id + "'");
    if (l.group.empty()) bad("light '" + l.id + "' has no group");
    if (!l.position.allFinite()) bad("light '" + l.id + "' has a non-finite position");
    auto sched = l.schedule;
    std::sort(sched.begin(), sched.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < sched.size(); ++i) {
      if (!(sched[i].end > sched[i].start)) bad("light '" + l.id + "' has an empty schedule entry");
      if (sched[i].state == FinalState::None) bad("schedule states must be red, green or off");
      if (i > 0 && sched[i].start < sched[i - 1].end) bad("light '" + l.id + "' has overlapping schedule entries");
    }
  }
}

json to_json(const CameraModel& cam) {
  const Mat3& r = cam.extrinsics.rotation();
  json rot = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) rot.push_back(r(i, k));
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"width", cam.width},
          {"height", cam.height},
          {"extrinsics", {{"rotation", rot}, {"translation", detail::to_json(cam.extrinsics.translation())}}}};
}

CameraModel camera_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "camera must be an object");
  detail::reject_unknown(j, {"fx", "fy", "cx", "cy", "width", "height", "hfov_deg", "extrinsics", "position", "pitch_deg"},
                         "camera", 0);
  const int width = opt_int(j, "width", 1280);
  const int height = opt_int(j, "height", 960);

  RigidTransform extrinsics;
  if (auto it = j.find("extrinsics"); it != j.end()) {
    detail::reject_unknown(*it, {"rotation", "translation"}, "extrinsics", 0);
    const json& rot = detail::field(*it, "rotation", 0);
    if (!rot.is_array() || rot.size() != 9) throw ParseError(0, "extrinsics.rotation must have 9 entries");
    Mat3 r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = detail::number(rot[i], "rotation", 0);
    extrinsics = RigidTransform(r, detail::vec3(detail::field(*it, "translation", 0), "translation", 0));
  } else {
    Vec3 pos(1.0, 0.0, 1.7);
    if (auto p = j.find("position"); p != j.end()) pos = detail::vec3(*p, "position", 0);
    extrinsics = CameraModel::forward_mount(pos, opt_number(j, "pitch_deg", 0.0) * kDeg);
  }

  CameraModel cam;
  if (j.contains("fx")) {
    cam.fx = detail::number(j["fx"], "fx", 0);
    cam.fy = opt_number(j, "fy", cam.fx);
    cam.cx = opt_number(j, "cx", 0.5 * width);
    cam.cy = opt_number(j, "cy", 0.5 * height);
    cam.width = width;
    cam.height = height;
    cam.extrinsics = extrinsics;
  } else {
    cam = CameraModel::from_hfov(width, height, opt_number(j, "hfov_deg", 66.0) * kDeg, extrinsics);
  }
  try {
    cam.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
  return cam;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "scenario must be a JSON object");
  detail::reject_unknown(j,
                         {"route_id", "duration", "frame_rate", "rng_seed", "activation_range", "label_range", "camera",
                          "lidar", "noise", "lights", "path", "head_size"},
                         "scenario", 0);
  Scenario s;
  if (auto it = j.find("route_id"); it != j.end()) s.route_id = detail::string(*it, "route_id", 0);
  s.duration = detail::number(detail::field(j, "duration", 0), "duration", 0);
  s.frame_rate = opt_number(j, "frame_rate", 16.0);
  s.activation_range = opt_number(j, "activation_range", 100.0);
  s.label_range = opt_number(j, "label_range", 150.0);
  if (auto it = j.find("rng_seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ParseError(0, "rng_seed must be a non-negative integer");
    s.rng_seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("head_size"); it != j.end()) s.head_size = detail::vec3(*it, "head_size", 0);

  s.camera = camera_from_json(j.contains("camera") ? object_field(j, "camera") : json::object());

  if (auto it = j.find("lidar"); it != j.end()) {
    const json& l = *it;
    detail::reject_unknown(l,
                           {"beams", "vfov_up_deg", "vfov_down_deg", "azimuth_steps", "position", "max_range",
                            "resolution", "ground_points", "poles", "pole_points", "clutter_radius"},
                           "lidar", 0);
    s.lidar.beams = opt_int(l, "beams", s.lidar.beams);
    s.lidar.vfov_up_deg = opt_number(l, "vfov_up_deg", s.lidar.vfov_up_deg);
    s.lidar.vfov_down_deg = opt_number(l, "vfov_down_deg", s.lidar.vfov_down_deg);
    s.lidar.azimuth_steps = opt_int(l, "azimuth_steps", s.lidar.azimuth_steps);
    if (auto p = l.find("position"); p != l.end()) s.lidar.position = detail::vec3(*p, "position", 0);
    s.lidar.max_range = opt_number(l, "max_range", s.lidar.max_range);
    s.lidar.resolution = opt_number(l, "resolution", s.lidar.resolution);
    s.lidar.ground_points = opt_int(l, "ground_points", s.lidar.ground_points);
    s.lidar.poles = opt_int(l, "poles", s.lidar.poles);
    s.lidar.pole_points = opt_int(l, "pole_points", s.lidar.pole_points);
    s.lidar.clutter_radius = opt_number(l, "clutter_radius", s.lidar.clutter_radius);
  }

  if (auto it = j.find("noise"); it != j.end()) {
    detail::reject_unknown(*it, {"localization", "detector"}, "noise", 0);
    if (auto loc = it->find("localization"); loc != it->end()) {
      detail::reject_unknown(*loc, {"longitudinal", "lateral", "correlation_time"}, "localization", 0);
      s.localization.longitudinal = opt_number(*loc, "longitudinal", 0.0);
      s.localization.lateral = opt_number(*loc, "lateral", 0.0);
      s.localization.correlation_time = opt_number(*loc, "correlation_time", 2.0);
    }
    if (auto det = it->find("detector"); det != it->end()) s.detector = noise_model_from_json(*det);
  }

  const json& lights = detail::field(j, "lights", 0);
  if (!lights.is_array()) throw ParseError(0, "lights must be an array");
  for (const json& l : lights) {
    detail::reject_unknown(l, {"id", "position", "group", "schedule", "facing_yaw_deg", "relevant", "detectable"},
                           "light", 0);
    ScenarioLight sl;
    sl.id = detail::string(detail::field(l, "id", 0), "id", 0);
    sl.position = detail::vec3(detail::field(l, "position", 0), "position", 0);
    sl.group = detail::string(detail::field(l, "group", 0), "group", 0);
    if (auto f = l.find("facing_yaw_deg"); f != l.end()) sl.facing_yaw = detail::number(*f, "facing_yaw_deg", 0) * kDeg;
    sl.relevant = opt_bool(l, "relevant", true);
    sl.detectable = opt_bool(l, "detectable", true);
    if (auto sch = l.find("schedule"); sch != l.end()) {
      if (!sch->is_array()) throw ParseError(0, "schedule must be an array");
      for (const json& e : *sch) {
        detail::reject_unknown(e, {"start", "end", "state"}, "schedule entry", 0);
        auto st = parse_final_state(detail::string(detail::field(e, "state", 0), "state", 0));
        if (!st) throw ParseError(0, "schedule state must be red, green or off");
        sl.schedule.push_back({detail::number(detail::field(e, "start", 0), "start", 0),
                               detail::number(detail::field(e, "end", 0), "end", 0), *st});
      }
    }
    s.lights.push_back(std::move(sl));
  }
  s.path = waypoints_from_json(detail::field(j, "path", 0));
  return s;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return detail::parse_document(ss.str(), 0);
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(load_json_file(path)); }

json to_json(const Rddf& rddf) { return {{"route_id", rddf.route_id}, {"waypoints", waypoints_to_json(rddf.waypoints)}}; }

Rddf rddf_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "rddf must be an object");
  detail::reject_unknown(j, {"route_id", "waypoints"}, "rddf", 0);
  return {detail::string(detail::field(j, "route_id", 0), "route_id", 0),
          waypoints_from_json(detail::field(j, "waypoints", 0))};
}

json to_json(const Truth& truth) {
  json frames = json::array();
  for (const auto& f : truth.frames)
    frames.push_back({{"t", f.t},
                      {"gt_state", to_string(f.gt_state)},
                      {"group", f.group ? json(*f.group) : json(nullptr)},
                      {"distance", f.distance},
                      {"observable", f.observable}});
  return {{"version", 1},
          {"activation_range", truth.activation_range},
          {"camera", to_json(truth.camera)},
          {"detector_noise", to_json(truth.detector_noise)},
          {"map", to_json(truth.map)},
          {"rddf", to_json(truth.rddf)},
          {"frames", frames}};
}

Truth truth_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "truth must be a JSON object");
  detail::reject_unknown(j, {"version", "activation_range", "camera", "detector_noise", "map", "rddf", "frames"}, "truth",
                         0);
  const json& v = detail::field(j, "version", 0);
  if (!v.is_number_integer() || v.get<int>() != 1) throw VersionMismatch("truth file version must be 1");
  Truth t;
  t.activation_range = detail::number(detail::field(j, "activation_range", 0), "activation_range", 0);
  t.camera = camera_from_json(detail::field(j, "camera", 0));
  t.detector_noise = noise_model_from_json(detail::field(j, "detector_noise", 0));
  t.map = prior_map_from_json(detail::field(j, "map", 0));
  t.rddf = rddf_from_json(detail::field(j, "rddf", 0));
  const json& frames = detail::field(j, "frames", 0);
  if (!frames.is_array()) throw ParseError(0, "frames must be an array");
  for (const json& f : frames) {
    detail::reject_unknown(f, {"t", "gt_state", "group", "distance", "observable"}, "truth frame", 0);
    TruthFrame tf;
    tf.t = detail::number(detail::field(f, "t", 0), "t", 0);
    auto st = parse_final_state(detail::string(detail::field(f, "gt_state", 0), "gt_state", 0));
    if (!st) throw ParseError(0, "gt_state must be one of none/off/red/green");
    tf.gt_state = *st;
    if (const json& g = detail::field(f, "group", 0); !g.is_null()) tf.group = detail::string(g, "group", 0);
    tf.distance = detail::number(detail::field(f, "distance", 0), "distance", 0);
    tf.observable = opt_bool(f, "observable", false);
    t.frames.push_back(std::move(tf));
  }
  return t;
}

void save_truth(const Truth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write truth " + path.string());
  out << to_json(truth).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Truth load_truth(const std::filesystem::path& path) { return truth_from_json(load_json_file(path)); }

}  // namespace tlr
