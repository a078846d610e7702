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

/// \file
/// Online phase: pick the relevant light group, project it into the image and
/// gate detector boxes against it.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlr/detection.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/prior_map.hpp"
#include "tlr/state.hpp"

namespace tlr {

struct RecognizerConfig {
  double activation_range = 100.0;  // m
  double gate_radius = 1.5;         // m, sphere around each mapped light
  double tau = 0.5;

  void validate() const;
};

enum class Advisory { Proceed, SlowStop, NoConstraint };

std::string_view to_string(Advisory a);
std::optional<Advisory> parse_advisory(std::string_view s);
Advisory advisory_for(FinalState s);

struct ProjectedLight {
  std::string light_id;
  PixelPoint pixel;
  double gate_radius_px = 0.0;
};

struct FrameVerdict {
  FinalState state = FinalState::None;
  std::optional<Detection> selected;
  std::optional<std::string> active_group;
  std::vector<ProjectedLight> projected_lights;
  Advisory advisory = Advisory::NoConstraint;
};

struct ActiveGroup {
  std::string group_id;
  /// Distance from the vehicle to the nearest member ahead of it.
  double distance = 0.0;
};

/// Group whose nearest member ahead of the vehicle (positive x in the vehicle
/// frame) is within `activation_range`; the nearest such group wins.
std::optional<ActiveGroup> find_active_group(const Pose6D& pose, const PriorMap& map, double activation_range);

/// `dets` must already be tau-filtered.
FrameVerdict recognize_frame(const LogFrame& frame, std::span<const Detection> dets, const PriorMap& map,
                             const CameraModel& cam, const RecognizerConfig& cfg);

struct TimedVerdict {
  double t = 0.0;
  FrameVerdict verdict;
};

/// One verdict per frame. A DetectorUnavailable is rethrown with the frame time.
std::vector<TimedVerdict> run_log(std::span<const LogFrame> log, const PriorMap& map, Detector& detector,
                                  const CameraModel& cam, const RecognizerConfig& cfg);

// Verdict stream, one JSON object per line:
//   {"t": s, "state": "...", "group": id|null, "selected": detection|null, "advisory": "..."}
struct VerdictRecord {
  double t = 0.0;
  FinalState state = FinalState::None;
  std::optional<std::string> group;
  std::optional<Detection> selected;
  Advisory advisory = Advisory::NoConstraint;

  bool operator==(const VerdictRecord&) const = default;
};

VerdictRecord to_record(const TimedVerdict& v);
std::string serialize_verdict(const VerdictRecord& v);
VerdictRecord parse_verdict(std::string_view line, std::size_t line_no = 0);
void write_verdicts(std::span<const VerdictRecord> verdicts, const std::filesystem::path& path);
std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path);

}  // namespace tlr
