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

#include "tlr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tlr/error.hpp"

namespace tlr {

double normalize_angle(double radians) {
  double a = std::remainder(radians, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Mat3 Pose6D::rotation() const {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

RigidTransform RigidTransform::from_pose(const Pose6D& pose) { return {pose.rotation(), pose.position}; }

RigidTransform RigidTransform::rotation_z(double radians, const Vec3& t) {
  return {Eigen::AngleAxisd(radians, Vec3::UnitZ()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
RigidTransform inverse(const RigidTransform& t) { return t.inverse(); }
Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max) &&
         x_min < x_max && y_min < y_max;
}

BoundingBox BoundingBox::shrunk(double fraction) const {
  const double dx = 0.5 * fraction * width();
  const double dy = 0.5 * fraction * height();
  return {x_min + dx, y_min + dy, x_max - dx, y_max - dy};
}

BoundingBox BoundingBox::clipped(double w, double h) const {
  return {std::clamp(x_min, 0.0, w), std::clamp(y_min, 0.0, h), std::clamp(x_max, 0.0, w),
          std::clamp(y_max, 0.0, h)};
}

CameraModel CameraModel::from_hfov(int width, int height, double hfov_radians, const RigidTransform& extrinsics) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * hfov_radians);
  cam.fy = cam.fx;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.extrinsics = extrinsics;
  return cam;
}

RigidTransform CameraModel::forward_mount(const Vec3& position, double pitch_up) {
  // Columns are the camera axes (x right, y down, z forward) in the vehicle frame.
  Mat3 level;
  level.col(0) = Vec3(0.0, -1.0, 0.0);
  level.col(1) = Vec3(0.0, 0.0, -1.0);
  level.col(2) = Vec3(1.0, 0.0, 0.0);
  const Mat3 pitch = Eigen::AngleAxisd(-pitch_up, Vec3::UnitY()).toRotationMatrix();
  return {pitch * level, position};
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidArgument("camera image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw InvalidArgument("camera principal point must lie inside the image");
  if (!extrinsics.is_valid()) throw InvalidArgument("camera extrinsics rotation is not orthonormal");
}

std::optional<PixelPoint> project_to_image(const CameraModel& cam, const Vec3& p) {
  if (!(p.z() > 0.0)) return std::nullopt;
  const double u = cam.fx * p.x() / p.z() + cam.cx;
  const double v = cam.fy * p.y() / p.z() + cam.cy;
  if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) return std::nullopt;
  return PixelPoint{u, v, p.z()};
}

double pixel_gate_radius(const CameraModel& cam, double depth, double r_world) {
  if (!(depth > 0.0)) throw NonPositiveDepth("gate depth must be positive, got " + std::to_string(depth));
  return std::max(cam.fx, cam.fy) * r_world / depth;
}

RigidTransform world_to_camera(const Pose6D& pose, const CameraModel& cam) {
  return cam.extrinsics.inverse() * RigidTransform::from_pose(pose).inverse();
}

}  // namespace tlr
