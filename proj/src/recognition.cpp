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

#include "tlr/recognition.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json_util.hpp"
#include "tlr/error.hpp"

namespace tlr {

using detail::json;

void RecognizerConfig::validate() const {
  if (!(activation_range > 0.0)) throw InvalidArgument("activation_range must be positive");
  if (!(gate_radius > 0.0)) throw InvalidArgument("gate_radius must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0,1]");
}

std::string_view to_string(Advisory a) {
  switch (a) {
    case Advisory::Proceed: return "proceed";
    case Advisory::SlowStop: return "slow_stop";
    case Advisory::NoConstraint: return "no_constraint";
  }
  return "no_constraint";
}

std::optional<Advisory> parse_advisory(std::string_view s) {
  for (Advisory a : {Advisory::Proceed, Advisory::SlowStop, Advisory::NoConstraint})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

Advisory advisory_for(FinalState s) {
  switch (s) {
    case FinalState::Green: return Advisory::Proceed;
    case FinalState::Red:
    case FinalState::Off: return Advisory::SlowStop;
    case FinalState::None: return Advisory::NoConstraint;
  }
  return Advisory::NoConstraint;
}

std::optional<ActiveGroup> find_active_group(const Pose6D& pose, const PriorMap& map, double activation_range) {
  const RigidTransform world_to_vehicle = RigidTransform::from_pose(pose).inverse();
  std::optional<ActiveGroup> best;
  for (const TLGroup& g : map.groups) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& id : g.light_ids) {
      const MapLight* light = map.find_light(id);
      if (!light) continue;
      if (world_to_vehicle.apply(light->position).x() <= 0.0) continue;
      nearest = std::min(nearest, (light->position - pose.position).norm());
    }
    if (nearest <= activation_range && (!best || nearest < best->distance)) best = ActiveGroup{g.id, nearest};
  }
  return best;
}

FrameVerdict recognize_frame(const LogFrame& frame, std::span<const Detection> dets, const PriorMap& map,
                             const CameraModel& cam, const RecognizerConfig& cfg) {
  FrameVerdict verdict;
  const auto active = find_active_group(frame.pose, map, cfg.activation_range);
  if (!active) return verdict;
  verdict.active_group = active->group_id;

  const TLGroup* group = map.find_group(active->group_id);
  const RigidTransform to_camera = world_to_camera(frame.pose, cam);
  for (const auto& id : group->light_ids) {
    const MapLight* light = map.find_light(id);
    const auto px = project_to_image(cam, to_camera.apply(light->position));
    if (!px) continue;
    verdict.projected_lights.push_back({id, *px, pixel_gate_radius(cam, px->depth, cfg.gate_radius)});
  }

  const Detection* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const Detection& d : dets) {
    const double u = d.bbox.center_u();
    const double v = d.bbox.center_v();
    bool in_gate = false;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& pl : verdict.projected_lights) {
      const double dist = std::hypot(u - pl.pixel.u, v - pl.pixel.v);
      in_gate = in_gate || dist <= pl.gate_radius_px;
      nearest = std::min(nearest, dist);
    }
    if (!in_gate) continue;
    // Ties: higher confidence, then RED over GREEN.
    const bool better = !best || nearest < best_distance ||
                        (nearest == best_distance &&
                         (d.confidence > best->confidence ||
                          (d.confidence == best->confidence && d.cls == StateClass::Red && best->cls != StateClass::Red)));
    if (better) {
      best = &d;
      best_distance = nearest;
    }
  }

  if (best) {
    verdict.selected = *best;
    verdict.state = to_final_state(best->cls);
  } else {
    verdict.state = FinalState::Off;
  }
  verdict.advisory = advisory_for(verdict.state);
  return verdict;
}

std::vector<TimedVerdict> run_log(std::span<const LogFrame> log, const PriorMap& map, Detector& detector,
                                  const CameraModel& cam, const RecognizerConfig& cfg) {
  cfg.validate();
  cam.validate();
  std::vector<TimedVerdict> out;
  out.reserve(log.size());
  for (const LogFrame& frame : log) {
    std::vector<Detection> raw;
    try {
      raw = detector.detect(frame);
    } catch (const DetectorUnavailable& e) {
      throw DetectorUnavailable("frame t=" + std::to_string(frame.t) + ": " + e.what());
    }
    const auto kept = filter_by_confidence(raw, cfg.tau);
    out.push_back({frame.t, recognize_frame(frame, kept, map, cam, cfg)});
  }
  return out;
}

VerdictRecord to_record(const TimedVerdict& v) {
  return {v.t, v.verdict.state, v.verdict.active_group, v.verdict.selected, v.verdict.advisory};
}

std::string serialize_verdict(const VerdictRecord& v) {
  const json j = {{"t", v.t},
                  {"state", to_string(v.state)},
                  {"group", v.group ? json(*v.group) : json(nullptr)},
                  {"selected", v.selected ? to_json(*v.selected) : json(nullptr)},
                  {"advisory", to_string(v.advisory)}};
  return j.dump();
}

VerdictRecord parse_verdict(std::string_view line, std::size_t line_no) {
  const json j = detail::parse_document(line, line_no);
  if (!j.is_object()) detail::fail(line_no, "verdict must be a JSON object");
  detail::reject_unknown(j, {"t", "state", "group", "selected", "advisory"}, "verdict", line_no);
  VerdictRecord v;
  v.t = detail::number(detail::field(j, "t", line_no), "t", line_no);
  auto state = parse_final_state(detail::string(detail::field(j, "state", line_no), "state", line_no));
  if (!state) detail::fail(line_no, "state must be one of none/off/red/green");
  v.state = *state;
  if (const json& g = detail::field(j, "group", line_no); !g.is_null()) v.group = detail::string(g, "group", line_no);
  if (const json& s = detail::field(j, "selected", line_no); !s.is_null()) v.selected = detection_from_json(s, line_no);
  auto adv = parse_advisory(detail::string(detail::field(j, "advisory", line_no), "advisory", line_no));
  if (!adv) detail::fail(line_no, "advisory must be proceed/slow_stop/no_constraint");
  v.advisory = *adv;
  return v;
}

void write_verdicts(std::span<const VerdictRecord> verdicts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write verdicts " + path.string());
  for (const auto& v : verdicts) out << serialize_verdict(v) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open verdicts " + path.string());
  std::vector<VerdictRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_verdict(text, line));
  }
  return out;
}

}  // namespace tlr
