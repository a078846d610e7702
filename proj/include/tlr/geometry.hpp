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
/// Rigid transforms, the vehicle pose and the pinhole camera.
///
/// Frame conventions used throughout the project:
///  - WORLD: right-handed, z up.
///  - VEHICLE: x forward, y left, z up. LiDAR points are reported in this frame.
///  - CAMERA: z forward (optical axis), x right, y down.
///
/// The chain for a LiDAR point is VEHICLE -> WORLD via the vehicle pose, and
/// for a mapped light WORLD -> VEHICLE -> CAMERA via the inverse pose and the
/// inverse camera extrinsics.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>

namespace tlr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct Pose6D {
  Vec3 position = Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  Pose6D() = default;
  Pose6D(const Vec3& p, double r, double pi, double y)
      : position(p), roll(normalize_angle(r)), pitch(normalize_angle(pi)), yaw(normalize_angle(y)) {}

  /// Rotation of the body axes in the parent frame, Z-Y-X intrinsic (yaw, pitch, roll).
  Mat3 rotation() const;
};

class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_pose(const Pose6D& pose);
  static RigidTransform translation_only(const Vec3& t) { return {Mat3::Identity(), t}; }
  static RigidTransform rotation_z(double radians, const Vec3& t = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

  /// `(*this * other).apply(p) == this->apply(other.apply(p))`
  RigidTransform operator*(const RigidTransform& other) const;

  /// True when the rotation is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// Result applies `b` first, then `a`.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);
Vec3 transform_point(const RigidTransform& t, const Vec3& p);

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (x_min + x_max); }
  double center_v() const { return 0.5 * (y_min + y_max); }
  bool contains(double u, double v) const { return u >= x_min && u <= x_max && v >= y_min && v <= y_max; }
  /// Shrinks each side by `fraction / 2` of the box extent, keeping the center.
  BoundingBox shrunk(double fraction) const;
  /// Clips to [0,width]x[0,height]; the result may be invalid.
  BoundingBox clipped(double width, double height) const;

  bool operator==(const BoundingBox&) const = default;
};

struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  /// Camera pose in the vehicle frame (camera -> vehicle).
  RigidTransform extrinsics;

  /// Square pixels, principal point at the image center.
  static CameraModel from_hfov(int width, int height, double hfov_radians, const RigidTransform& extrinsics);

  /// Forward-looking mount at `position` in the vehicle frame, optical axis
  /// along vehicle +x, optionally pitched up by `pitch_up` radians.
  static RigidTransform forward_mount(const Vec3& position, double pitch_up = 0.0);

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// Pinhole projection of a camera-frame point; nullopt when the point is
/// behind the camera or falls outside [0,width)x[0,height).
std::optional<PixelPoint> project_to_image(const CameraModel& cam, const Vec3& p_camera);

/// Radius in pixels of the circle approximating a sphere of radius `r_world`
/// at `depth`. Throws NonPositiveDepth when depth <= 0.
double pixel_gate_radius(const CameraModel& cam, double depth, double r_world);

/// WORLD -> CAMERA for a vehicle at `pose`.
RigidTransform world_to_camera(const Pose6D& pose, const CameraModel& cam);

}  // namespace tlr
