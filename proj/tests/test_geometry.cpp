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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tlr/error.hpp"
#include "tlr/geometry.hpp"

using namespace tlr;

namespace {

constexpr double kPi = 3.14159265358979323846;

CameraModel test_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 1000.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;
  return cam;
}

RigidTransform random_transform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-kPi, kPi), pos(-100.0, 100.0);
  return RigidTransform::from_pose(Pose6D(Vec3(pos(rng), pos(rng), pos(rng)), ang(rng), ang(rng) / 2, ang(rng)));
}

}  // namespace

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(normalize_angle(0.25) == 0.25);
  const Pose6D p(Vec3::Zero(), 7.0, 0.0, -7.0);
  CHECK(p.roll == doctest::Approx(7.0 - 2 * kPi));
  CHECK(p.yaw == doctest::Approx(-7.0 + 2 * kPi));
}

TEST_CASE("compose") {
  std::mt19937_64 rng(1);
  const RigidTransform t = random_transform(rng);

  SUBCASE("identity is neutral") {
    const RigidTransform c = compose(t, RigidTransform::identity());
    CHECK((c.rotation() - t.rotation()).norm() < 1e-12);
    CHECK((c.translation() - t.translation()).norm() < 1e-12);
  }
  SUBCASE("with the inverse gives identity") {
    const RigidTransform c = compose(t, inverse(t));
    CHECK((c.rotation() - Mat3::Identity()).norm() < 1e-9);
    CHECK(c.translation().norm() < 1e-9);
  }
  SUBCASE("two quarter turns about z send x to -x") {
    const RigidTransform q = RigidTransform::rotation_z(kPi / 2);
    const Vec3 p = compose(q, q).apply(Vec3(1, 0, 0));
    CHECK((p - Vec3(-1, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("applies b first") {
    const RigidTransform b = random_transform(rng);
    const Vec3 p(1.5, -2.0, 0.25);
    CHECK((compose(t, b).apply(p) - t.apply(b.apply(p))).norm() < 1e-9);
  }
}

TEST_CASE("transform_point") {
  CHECK(transform_point(RigidTransform::identity(), Vec3(1, 2, 3)) == Vec3(1, 2, 3));
  CHECK(transform_point(RigidTransform::translation_only(Vec3(0, 0, 5)), Vec3(1, 2, 3)) == Vec3(1, 2, 8));
  const Vec3 p = transform_point(RigidTransform::rotation_z(kPi / 2, Vec3(1, 0, 0)), Vec3(1, 0, 0));
  CHECK((p - Vec3(1, 1, 0)).norm() < 1e-12);
}

TEST_CASE("inverse round trip and validity over random transforms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform t = random_transform(rng);
    REQUIRE(t.is_valid());
    REQUIRE(t.inverse().is_valid());
    const Vec3 p(pos(rng), pos(rng), pos(rng));
    CHECK((transform_point(inverse(t), transform_point(t, p)) - p).norm() < 1e-9);
  }
  Mat3 skew = Mat3::Identity();
  skew(0, 1) = 0.1;
  CHECK_FALSE(RigidTransform(skew, Vec3::Zero()).is_valid());
  CHECK_FALSE(RigidTransform(-Mat3::Identity(), Vec3::Zero()).is_valid());
}

TEST_CASE("pose rotation is yaw-pitch-roll") {
  const Pose6D yaw_only(Vec3::Zero(), 0, 0, kPi / 2);
  CHECK((yaw_only.rotation() * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);
  // Positive pitch turns the nose down (+x towards -z).
  const Pose6D pitch_only(Vec3::Zero(), 0, kPi / 2, 0);
  CHECK((pitch_only.rotation() * Vec3(1, 0, 0) - Vec3(0, 0, -1)).norm() < 1e-12);
  const Pose6D p(Vec3::Zero(), 0.1, 0.2, 0.3);
  const Mat3 expected = (Eigen::AngleAxisd(0.3, Vec3::UnitZ()) * Eigen::AngleAxisd(0.2, Vec3::UnitY()) *
                         Eigen::AngleAxisd(0.1, Vec3::UnitX()))
                            .toRotationMatrix();
  CHECK((p.rotation() - expected).norm() < 1e-12);
}

TEST_CASE("project_to_image") {
  const CameraModel cam = test_camera();
  auto a = project_to_image(cam, Vec3(0, 0, 10));
  REQUIRE(a);
  CHECK(a->u == 320.0);
  CHECK(a->v == 240.0);
  CHECK(a->depth == 10.0);

  auto b = project_to_image(cam, Vec3(1, 0, 10));
  REQUIRE(b);
  CHECK(b->u == doctest::Approx(420.0));
  CHECK(b->v == doctest::Approx(240.0));
  CHECK(b->depth == 10.0);

  CHECK_FALSE(project_to_image(cam, Vec3(0, 0, -5)));
  CHECK_FALSE(project_to_image(cam, Vec3(0, 0, 0)));
  CHECK_FALSE(project_to_image(cam, Vec3(4, 0, 10)));  // u = 720
}

TEST_CASE("project_to_image agrees with the hand pinhole over random points") {
  const CameraModel cam = test_camera();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xy(-20.0, 20.0), z(-5.0, 60.0);
  int visible = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec3 p(xy(rng), xy(rng), z(rng));
    oracle::Pixel ref{};
    const bool in = oracle::project(cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height, p.x(), p.y(), p.z(), ref);
    const auto got = project_to_image(cam, p);
    REQUIRE(got.has_value() == in);
    if (got) {
      ++visible;
      CHECK(got->depth > 0.0);
      CHECK(std::abs(got->u - ref.u) < 1e-9);
      CHECK(std::abs(got->v - ref.v) < 1e-9);
    }
  }
  CHECK(visible > 100);
}

TEST_CASE("pixel_gate_radius") {
  const CameraModel cam = test_camera();
  CHECK(pixel_gate_radius(cam, 50.0, 1.5) == doctest::Approx(30.0));
  CHECK(pixel_gate_radius(cam, 15.0, 1.5) == doctest::Approx(100.0));
  CHECK(pixel_gate_radius(cam, 15.0, 0.0) == 0.0);
  CHECK_THROWS_AS(pixel_gate_radius(cam, 0.0, 1.5), NonPositiveDepth);
  CHECK_THROWS_AS(pixel_gate_radius(cam, -1.0, 1.5), NonPositiveDepth);
  CHECK(pixel_gate_radius(cam, 10.0, 1.5) > pixel_gate_radius(cam, 20.0, 1.5));
  CHECK(pixel_gate_radius(cam, 10.0, 2.0) > pixel_gate_radius(cam, 10.0, 1.5));
  CameraModel aniso = cam;
  aniso.fy = 1200.0;
  CHECK(pixel_gate_radius(aniso, 10.0, 1.0) == doctest::Approx(120.0));
}

TEST_CASE("scaling the intrinsics scales pixels and gate radius") {
  const CameraModel cam = test_camera();
  CameraModel big = cam;
  const double k = 2.0;
  big.fx *= k;
  big.fy *= k;
  big.cx *= k;
  big.cy *= k;
  big.width *= 2;
  big.height *= 2;
  const Vec3 p(0.7, -0.4, 12.0);
  auto a = project_to_image(cam, p);
  auto b = project_to_image(big, p);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->u == doctest::Approx(k * a->u));
  CHECK(b->v == doctest::Approx(k * a->v));
  CHECK(pixel_gate_radius(big, 12.0, 1.5) == doctest::Approx(k * pixel_gate_radius(cam, 12.0, 1.5)));
}

TEST_CASE("camera validation") {
  CameraModel cam = test_camera();
  CHECK_NOTHROW(cam.validate());
  cam.fx = 0;
  CHECK_THROWS_AS(cam.validate(), InvalidArgument);
  cam = test_camera();
  cam.cx = 640;
  CHECK_THROWS_AS(cam.validate(), InvalidArgument);
}

TEST_CASE("from_hfov uses square pixels centred on the image") {
  const CameraModel cam =
      CameraModel::from_hfov(1280, 960, 66.0 * kPi / 180.0, CameraModel::forward_mount(Vec3(1, 0, 1.7)));
  CHECK(cam.fx == cam.fy);
  CHECK(cam.fx == doctest::Approx(640.0 / std::tan(33.0 * kPi / 180.0)));
  CHECK(cam.cx == 640.0);
  CHECK(cam.cy == 480.0);
}

TEST_CASE("world_to_camera chains pose and extrinsics") {
  const CameraModel cam =
      CameraModel::from_hfov(1280, 960, 66.0 * kPi / 180.0, CameraModel::forward_mount(Vec3(1, 0, 1.7)));
  // Vehicle at (10, 5) facing +y; a point 20 m ahead at camera height lands on
  // the optical axis.
  const Pose6D pose(Vec3(10, 5, 0), 0, 0, kPi / 2);
  const Vec3 c = world_to_camera(pose, cam).apply(Vec3(10, 5 + 1 + 20, 1.7));
  CHECK(c.x() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(c.y() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(c.z() == doctest::Approx(20.0));
  // Left of the vehicle is -x in the image, up is -y.
  const Vec3 left_up = world_to_camera(pose, cam).apply(Vec3(10 - 2, 5 + 21, 3.7));
  CHECK(left_up.x() == doctest::Approx(-2.0));
  CHECK(left_up.y() == doctest::Approx(-2.0));
}

TEST_CASE("forward mount pitched up looks upward") {
  const RigidTransform m = CameraModel::forward_mount(Vec3::Zero(), 0.1);
  const Vec3 axis = m.rotation() * Vec3(0, 0, 1);  // optical axis in the vehicle frame
  CHECK(axis.x() == doctest::Approx(std::cos(0.1)));
  CHECK(axis.z() == doctest::Approx(std::sin(0.1)));
  CHECK(m.is_valid());
}

TEST_CASE("bounding box helpers") {
  const BoundingBox b{10, 20, 30, 60};
  CHECK(b.valid());
  CHECK(b.area() == 800.0);
  CHECK(b.center_u() == 20.0);
  CHECK(b.center_v() == 40.0);
  const BoundingBox s = b.shrunk(0.1);
  CHECK(s.x_min == doctest::Approx(11.0));
  CHECK(s.x_max == doctest::Approx(29.0));
  CHECK(s.y_min == doctest::Approx(22.0));
  CHECK(s.y_max == doctest::Approx(58.0));
  CHECK(b.shrunk(0.0) == b);
  const BoundingBox c = BoundingBox{-5, -5, 10, 10}.clipped(8, 100);
  CHECK(c == BoundingBox{0, 0, 8, 10});
  CHECK_FALSE(BoundingBox{200, 0, 300, 10}.clipped(100, 100).valid());
  CHECK_FALSE((BoundingBox{5, 5, 5, 6}).valid());
}
