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
/// Synthetic scenarios with known ground truth, and the route (RDDF) and
/// truth file formats that accompany a generated log.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlr/detection.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/prior_map.hpp"
#include "tlr/state.hpp"

namespace tlr {

struct ScheduleEntry {
  double start = 0.0;  // s, inclusive
  double end = 0.0;    // s, exclusive
  FinalState state = FinalState::Off;  // Red, Green or Off
};

struct ScenarioLight {
  std::string id;
  /// Center of the lamp face, world frame.
  Vec3 position = Vec3::Zero();
  std::string group;
  std::vector<ScheduleEntry> schedule;
  /// Direction the face points to; defaults to the nearest point of the path.
  std::optional<double> facing_yaw;
  bool relevant = true;
  /// False models a permanently occluded head: no LiDAR returns, no boxes.
  bool detectable = true;

  /// Scheduled state at `t`; Off outside every entry.
  FinalState state_at(double t) const;
};

struct Waypoint {
  Pose6D pose;
  double speed = 0.0;  // m/s along the segment that starts here
};

struct LidarModel {
  int beams = 32;
  double vfov_up_deg = 10.0;
  double vfov_down_deg = -30.0;
  int azimuth_steps = 1080;
  Vec3 position{0.0, 0.0, 1.9};  // vehicle frame
  double max_range = 120.0;
  double resolution = 0.001;  // m, returns are quantized to this step
  int ground_points = 400;    // uniform ground spray per frame
  int poles = 12;
  int pole_points = 20;       // per pole within clutter_radius
  double clutter_radius = 60.0;

  std::size_t scan_size() const { return static_cast<std::size_t>(beams) * azimuth_steps; }
};

struct LocalizationNoise {
  double longitudinal = 0.0;  // m, stationary std-dev
  double lateral = 0.0;       // m, stationary std-dev
  double correlation_time = 2.0;  // s
};

struct Scenario {
  std::string route_id = "route";
  std::vector<ScenarioLight> lights;
  std::vector<Waypoint> path;
  CameraModel camera;
  LidarModel lidar;
  LocalizationNoise localization;
  NoiseModel detector;
  /// Lamp head extents: width, height, depth (m).
  Vec3 head_size{0.3, 0.9, 0.3};
  double duration = 0.0;
  double frame_rate = 16.0;
  double activation_range = 100.0;
  /// Lights farther than this from the camera produce no boxes.
  double label_range = 150.0;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidScenario with the reason.
  void validate() const;
};

struct Rddf {
  std::string route_id;
  std::vector<Waypoint> waypoints;
};

struct TruthFrame {
  double t = 0.0;
  FinalState gt_state = FinalState::None;
  std::optional<std::string> group;
  /// Distance to the nearest member ahead when a group is active, else 0.
  double distance = 0.0;
  /// An active-group light has a box and its mapped point projects into the image.
  bool observable = false;

  bool operator==(const TruthFrame&) const = default;
};

struct Truth {
  PriorMap map;
  Rddf rddf;
  CameraModel camera;
  NoiseModel detector_noise;
  double activation_range = 100.0;
  std::vector<TruthFrame> frames;
};

struct GeneratedRun {
  std::vector<LogFrame> log;
  Truth truth;
};

/// Deterministic given `scenario.rng_seed`.
GeneratedRun generate(const Scenario& scenario);

/// Ground-truth pose of the vehicle at time `t` following `path`.
Pose6D path_pose_at(const std::vector<Waypoint>& path, double t);

/// World-frame corners of a light's head box.
std::vector<Vec3> head_corners(const ScenarioLight& light, double facing_yaw, const Vec3& head_size);

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const CameraModel& cam);
/// Accepts explicit intrinsics or {"width","height","hfov_deg"}; extrinsics as
/// {"rotation": [9 row-major], "translation": [3]} or "position" + "pitch_deg".
CameraModel camera_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Rddf& rddf);
Rddf rddf_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Truth& truth);
Truth truth_from_json(const nlohmann::json& j);
void save_truth(const Truth& truth, const std::filesystem::path& path);
Truth load_truth(const std::filesystem::path& path);

nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace tlr
