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

#include "tlr/overlay.hpp"

#include <algorithm>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tlr/error.hpp"

namespace tlr {

std::vector<unsigned char> render_overlay_png(const LogFrame& frame, const CameraModel& cam,
                                              std::span<const TLCandidate> candidates, int max_width) {
  const double scale = std::min(1.0, static_cast<double>(max_width) / cam.width);
  const int w = std::max(1, static_cast<int>(cam.width * scale));
  const int h = std::max(1, static_cast<int>(cam.height * scale));
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(32, 32, 32));

  const RigidTransform vehicle_to_camera = cam.extrinsics.inverse();
  for (const Vec3& p : frame.lidar) {
    const auto px = project_to_image(cam, vehicle_to_camera.apply(p));
    if (!px) continue;
    // Near returns bright, far ones dim.
    const int shade = static_cast<int>(std::clamp(255.0 - 2.0 * px->depth, 60.0, 255.0));
    cv::circle(img, cv::Point(static_cast<int>(px->u * scale), static_cast<int>(px->v * scale)), 1,
               cv::Scalar(shade, shade, shade), cv::FILLED);
  }

  for (const auto& g : frame.gt_detections) {
    const cv::Scalar color = g.cls == StateClass::Red ? cv::Scalar(60, 60, 220) : cv::Scalar(60, 200, 60);
    cv::rectangle(img, cv::Point(static_cast<int>(g.bbox.x_min * scale), static_cast<int>(g.bbox.y_min * scale)),
                  cv::Point(static_cast<int>(g.bbox.x_max * scale), static_cast<int>(g.bbox.y_max * scale)), color, 1);
  }

  const RigidTransform to_camera = world_to_camera(frame.pose, cam);
  for (const auto& c : candidates) {
    const auto px = project_to_image(cam, to_camera.apply(c.centroid));
    if (!px) continue;
    cv::Scalar color(0, 220, 255);  // BGR
    if (c.status == CandidateStatus::Accepted) color = cv::Scalar(0, 255, 0);
    if (c.status == CandidateStatus::Rejected) color = cv::Scalar(0, 0, 255);
    const cv::Point at(static_cast<int>(px->u * scale), static_cast<int>(px->v * scale));
    cv::drawMarker(img, at, color, cv::MARKER_CROSS, 14, 2);
    cv::putText(img, c.id, at + cv::Point(8, -8), cv::FONT_HERSHEY_SIMPLEX, 0.4, color, 1);
  }

  std::vector<unsigned char> png;
  if (!cv::imencode(".png", img, png)) throw IoError("PNG encoding failed");
  return png;
}

}  // namespace tlr
