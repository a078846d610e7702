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
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>

#include "tlr/error.hpp"
#include "tlr/recognition.hpp"
#include "tlr/replay.hpp"

namespace tlr {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double segment_heading(const Waypoint& a, const Waypoint& b) {
  const Vec3 d = b.pose.position - a.pose.position;
  if (std::hypot(d.x(), d.y()) == 0.0) return a.pose.yaw;
  return std::atan2(d.y(), d.x());
}

// Closest point of the polyline to `p` in the ground plane.
Vec3 closest_on_path(const std::vector<Waypoint>& path, const Vec3& p) {
  Vec3 best = path.front().pose.position;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < path.size() || i == 0; ++i) {
    const Vec3 a = path[i].pose.position;
    const Vec3 b = i + 1 < path.size() ? path[i + 1].pose.position : a;
    const Eigen::Vector2d ab = (b - a).head<2>();
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).head<2>().dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec3 q = a + s * (b - a);
    const double d = (q - p).head<2>().norm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
    if (path.size() == 1) break;
  }
  return best;
}

struct HeadBox {
  Vec3 center;       // lidar frame
  Mat3 axes;         // columns: normal, lateral, up (lidar frame)
  Vec3 half;         // half extents along the axes
};

// Nearest intersection distance along a unit ray from the origin, if any.
std::optional<double> intersect(const HeadBox& box, const Vec3& dir) {
  const Vec3 o = box.axes.transpose() * (-box.center);
  const Vec3 d = box.axes.transpose() * dir;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (std::abs(o[k]) > box.half[k]) return std::nullopt;
      continue;
    }
    double t1 = (-box.half[k] - o[k]) / d[k];
    double t2 = (box.half[k] - o[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    t_min = std::max(t_min, t1);
    t_max = std::min(t_max, t2);
    if (t_min > t_max) return std::nullopt;
  }
  if (t_min <= 0.0) return std::nullopt;
  return t_min;
}

class LidarSimulator {
 public:
  explicit LidarSimulator(const LidarModel& m) : model_(m) {
    az_step_ = 2.0 * kPi / m.azimuth_steps;
    el_step_ = m.beams > 1 ? (m.vfov_up_deg - m.vfov_down_deg) * kDeg / (m.beams - 1) : 0.0;
  }

  // Ray index -> range of the nearest hit, over all heads.
  void cast(const HeadBox& box, std::map<long, double>& hits) const {
    double el_lo = std::numeric_limits<double>::infinity(), el_hi = -el_lo;
    double az_lo = el_lo, az_hi = -el_lo;
    const double az_c = std::atan2(box.center.y(), box.center.x());
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          const Vec3 c = box.center + box.axes * Vec3(sx * box.half.x(), sy * box.half.y(), sz * box.half.z());
          const double el = std::atan2(c.z(), std::hypot(c.x(), c.y()));
          const double az = normalize_angle(std::atan2(c.y(), c.x()) - az_c);
          el_lo = std::min(el_lo, el);
          el_hi = std::max(el_hi, el);
          az_lo = std::min(az_lo, az);
          az_hi = std::max(az_hi, az);
        }

    const double down = model_.vfov_down_deg * kDeg;
    int b_lo = 0, b_hi = 0;
    if (model_.beams > 1) {
      b_lo = std::max(0, static_cast<int>(std::floor((el_lo - down) / el_step_)) - 1);
      b_hi = std::min(model_.beams - 1, static_cast<int>(std::ceil((el_hi - down) / el_step_)) + 1);
    }
    const long k_lo = static_cast<long>(std::floor((az_c + az_lo + kPi) / az_step_)) - 1;
    const long k_hi = static_cast<long>(std::ceil((az_c + az_hi + kPi) / az_step_)) + 1;
    const long n_az = model_.azimuth_steps;

    for (int b = b_lo; b <= b_hi; ++b) {
      const double el = down + b * el_step_;
      for (long kk = k_lo; kk <= k_hi; ++kk) {
        const long k = ((kk % n_az) + n_az) % n_az;
        const double az = -kPi + k * az_step_;
        const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        const auto t = intersect(box, dir);
        if (!t || *t > model_.max_range) continue;
        const long id = static_cast<long>(b) * n_az + k;
        auto [it, inserted] = hits.emplace(id, *t);
        if (!inserted) it->second = std::min(it->second, *t);
      }
    }
  }

  Vec3 direction(long ray_id) const {
    const long b = ray_id / model_.azimuth_steps;
    const long k = ray_id % model_.azimuth_steps;
    const double el = model_.vfov_down_deg * kDeg + b * el_step_;
    const double az = -kPi + k * az_step_;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }

 private:
  LidarModel model_;
  double az_step_;
  double el_step_;
};

double quantize(double v, double step) { return step > 0.0 ? std::round(v / step) * step : v; }

}  // namespace

Pose6D path_pose_at(const std::vector<Waypoint>& path, double t) {
  if (path.size() == 1) return path.front().pose;
  double elapsed = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Waypoint& a = path[i];
    const Waypoint& b = path[i + 1];
    const double yaw = segment_heading(a, b);
    const double len = (b.pose.position - a.pose.position).norm();
    if (a.speed <= 0.0) return Pose6D(a.pose.position, a.pose.roll, a.pose.pitch, yaw);
    const double dur = len / a.speed;
    if (t < elapsed + dur) {
      const double s = dur > 0.0 ? (t - elapsed) / dur : 0.0;
      return Pose6D(a.pose.position + s * (b.pose.position - a.pose.position), a.pose.roll, a.pose.pitch, yaw);
    }
    elapsed += dur;
  }
  const Waypoint& last = path.back();
  return Pose6D(last.pose.position, last.pose.roll, last.pose.pitch,
                segment_heading(path[path.size() - 2], last));
}

std::vector<Vec3> head_corners(const ScenarioLight& light, double facing_yaw, const Vec3& size) {
  const Vec3 n(std::cos(facing_yaw), std::sin(facing_yaw), 0.0);
  const Vec3 l(-std::sin(facing_yaw), std::cos(facing_yaw), 0.0);
  const Vec3 up = Vec3::UnitZ();
  const Vec3 center = light.position - 0.5 * size.z() * n;
  std::vector<Vec3> out;
  for (int sd = -1; sd <= 1; sd += 2)
    for (int sw = -1; sw <= 1; sw += 2)
      for (int sh = -1; sh <= 1; sh += 2)
        out.push_back(center + sd * 0.5 * size.z() * n + sw * 0.5 * size.x() * l + sh * 0.5 * size.y() * up);
  return out;
}

GeneratedRun generate(const Scenario& sc) {
  sc.validate();
  GeneratedRun run;
  Truth& truth = run.truth;
  truth.camera = sc.camera;
  truth.detector_noise = sc.detector;
  truth.activation_range = sc.activation_range;
  truth.rddf = {sc.route_id, sc.path};

  std::vector<double> facing;
  for (const auto& l : sc.lights) {
    if (l.facing_yaw) {
      facing.push_back(normalize_angle(*l.facing_yaw));
    } else {
      const Vec3 q = closest_on_path(sc.path, l.position);
      facing.push_back(std::atan2(q.y() - l.position.y(), q.x() - l.position.x()));
    }
  }

  truth.map.route_id = sc.route_id;
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::string, std::size_t> light_index;
  for (std::size_t i = 0; i < sc.lights.size(); ++i) {
    const auto& l = sc.lights[i];
    light_index[l.id] = i;
    if (!l.relevant) continue;
    truth.map.lights.push_back({l.id, l.position, {sc.route_id}});
    groups[l.group].push_back(l.id);
  }
  for (auto& [gid, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    truth.map.groups.push_back({gid, ids});
  }

  auto loc_rng = make_stream(sc.rng_seed, 1);
  auto clutter_rng = make_stream(sc.rng_seed, 2);
  auto pole_rng = make_stream(sc.rng_seed, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Pole positions scattered along the route, off the roadway.
  std::vector<Vec3> poles;
  {
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < sc.path.size(); ++i)
      cum.push_back(cum.back() + (sc.path[i + 1].pose.position - sc.path[i].pose.position).norm());
    for (int p = 0; p < sc.lidar.poles; ++p) {
      const double s = unit(pole_rng) * cum.back();
      const double side = unit(pole_rng) < 0.5 ? -1.0 : 1.0;
      const double offset = side * (6.0 + 9.0 * unit(pole_rng));
      std::size_t seg = 0;
      while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
      Vec3 base = sc.path[seg].pose.position;
      double yaw = sc.path[seg].pose.yaw;
      if (sc.path.size() > 1) {
        const Vec3 a = sc.path[seg].pose.position;
        const Vec3 b = sc.path[seg + 1].pose.position;
        const double len = cum[seg + 1] - cum[seg];
        base = len > 0.0 ? a + (s - cum[seg]) / len * (b - a) : a;
        yaw = segment_heading(sc.path[seg], sc.path[seg + 1]);
      }
      poles.emplace_back(base.x() - std::sin(yaw) * offset, base.y() + std::cos(yaw) * offset, 0.0);
    }
  }

  const LidarSimulator lidar(sc.lidar);
  const CameraModel& cam = sc.camera;
  const double dt = 1.0 / sc.frame_rate;
  const double ou_a = std::exp(-dt / sc.localization.correlation_time);
  const double ou_b = std::sqrt(1.0 - ou_a * ou_a);
  double err_lon = sc.localization.longitudinal * normal(loc_rng);
  double err_lat = sc.localization.lateral * normal(loc_rng);

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) / sc.frame_rate;
    if (t >= sc.duration) break;
    const Pose6D true_pose = path_pose_at(sc.path, t);
    if (k > 0) {
      err_lon = ou_a * err_lon + ou_b * sc.localization.longitudinal * normal(loc_rng);
      err_lat = ou_a * err_lat + ou_b * sc.localization.lateral * normal(loc_rng);
    }

    LogFrame frame;
    frame.t = t;
    frame.pose = true_pose;
    const double cy = std::cos(true_pose.yaw), sy = std::sin(true_pose.yaw);
    frame.pose.position += Vec3(cy * err_lon - sy * err_lat, sy * err_lon + cy * err_lat, 0.0);

    const RigidTransform vehicle_to_world = RigidTransform::from_pose(true_pose);
    const RigidTransform world_to_vehicle = vehicle_to_world.inverse();

    // Light heads, ray cast.
    std::map<long, double> hits;
    for (std::size_t i = 0; i < sc.lights.size(); ++i) {
      const auto& l = sc.lights[i];
      if (!l.detectable) continue;
      const double fy = facing[i];
      const Vec3 n(std::cos(fy), std::sin(fy), 0.0);
      const Vec3 lat(-std::sin(fy), std::cos(fy), 0.0);
      HeadBox box;
      box.center = world_to_vehicle.apply(l.position - 0.5 * sc.head_size.z() * n) - sc.lidar.position;
      if (box.center.norm() > sc.lidar.max_range + sc.head_size.norm()) continue;
      const Mat3 r = world_to_vehicle.rotation();
      box.axes.col(0) = r * n;
      box.axes.col(1) = r * lat;
      box.axes.col(2) = r * Vec3::UnitZ();
      box.half = Vec3(0.5 * sc.head_size.z(), 0.5 * sc.head_size.x(), 0.5 * sc.head_size.y());
      lidar.cast(box, hits);
    }
    const std::size_t cap = sc.lidar.scan_size();
    auto push = [&](const Vec3& p) {
      if (frame.lidar.size() >= cap) return;
      frame.lidar.emplace_back(quantize(p.x(), sc.lidar.resolution), quantize(p.y(), sc.lidar.resolution),
                               quantize(p.z(), sc.lidar.resolution));
    };
    for (const auto& [id, range] : hits) push(sc.lidar.position + range * lidar.direction(id));

    // Clutter: ground spray around the vehicle and sprays on nearby poles.
    const double radius = sc.lidar.clutter_radius;
    for (int g = 0; g < sc.lidar.ground_points; ++g) {
      const double r = radius * std::sqrt(unit(clutter_rng));
      const double a = 2.0 * kPi * unit(clutter_rng);
      const Vec3 w(true_pose.position.x() + r * std::cos(a), true_pose.position.y() + r * std::sin(a), 0.0);
      push(world_to_vehicle.apply(w));
    }
    for (const Vec3& pole : poles) {
      if ((pole - true_pose.position).head<2>().norm() > radius) continue;
      for (int q = 0; q < sc.lidar.pole_points; ++q) {
        const double a = 2.0 * kPi * unit(clutter_rng);
        const Vec3 w = pole + Vec3(0.15 * std::cos(a), 0.15 * std::sin(a), 4.0 * unit(clutter_rng));
        push(world_to_vehicle.apply(w));
      }
    }

    // Ground-truth boxes: exact projected head extents.
    const RigidTransform to_camera = world_to_camera(true_pose, cam);
    const Vec3 cam_world = vehicle_to_world.apply(cam.extrinsics.translation());
    for (std::size_t i = 0; i < sc.lights.size(); ++i) {
      const auto& l = sc.lights[i];
      const FinalState st = l.state_at(t);
      if (!l.detectable || (st != FinalState::Red && st != FinalState::Green)) continue;
      const Vec3 n(std::cos(facing[i]), std::sin(facing[i]), 0.0);
      if (n.dot(cam_world - l.position) <= 0.0) continue;
      if ((cam_world - l.position).norm() > sc.label_range) continue;
      BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      bool in_front = true;
      for (const Vec3& c : head_corners(l, facing[i], sc.head_size)) {
        const Vec3 pc = to_camera.apply(c);
        if (pc.z() <= 0.0) {
          in_front = false;
          break;
        }
        const double u = cam.fx * pc.x() / pc.z() + cam.cx;
        const double v = cam.fy * pc.y() / pc.z() + cam.cy;
        box = {std::min(box.x_min, u), std::min(box.y_min, v), std::max(box.x_max, u), std::max(box.y_max, v)};
      }
      if (!in_front) continue;
      box = box.clipped(cam.width, cam.height);
      if (box.width() < 1.0 || box.height() < 1.0) continue;
      frame.gt_detections.push_back({box, st == FinalState::Red ? StateClass::Red : StateClass::Green, l.id});
    }

    TruthFrame tf;
    tf.t = t;
    if (const auto active = find_active_group(true_pose, truth.map, sc.activation_range)) {
      tf.group = active->group_id;
      tf.distance = active->distance;
      const TLGroup* g = truth.map.find_group(active->group_id);
      const RigidTransform world_to_veh = vehicle_to_world.inverse();
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& id : g->light_ids) {
        const auto& l = sc.lights[light_index.at(id)];
        if (world_to_veh.apply(l.position).x() <= 0.0) continue;
        const double d = (l.position - true_pose.position).norm();
        if (d < nearest) {
          nearest = d;
          tf.gt_state = l.state_at(t);
        }
        const bool boxed = std::any_of(frame.gt_detections.begin(), frame.gt_detections.end(),
                                       [&](const GtDetection& gd) { return gd.light_id == id; });
        tf.observable = tf.observable || (boxed && project_to_image(cam, to_camera.apply(l.position)).has_value());
      }
    }
    frame.gt_state = tf.gt_state;
    truth.frames.push_back(tf);
    run.log.push_back(std::move(frame));
  }
  return run;
}

}  // namespace tlr
