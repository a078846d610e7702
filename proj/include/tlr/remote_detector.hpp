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
/// HTTP client for an external detector service.
///
/// Wire protocol: `POST /detect` with `{"image_b64": <PNG, base64>, "tau": t}`;
/// the server answers `{"detections": [{"bbox": [x0,y0,x1,y1],
/// "class": "red"|"green", "confidence": c}]}`.
#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlr/detection.hpp"

namespace tlr {

class RemoteDetector : public Detector {
 public:
  /// `base_url` like "http://127.0.0.1:8500". Relative `image_ref`s resolve
  /// against `image_root`.
  RemoteDetector(std::string base_url, int image_width, int image_height, double tau,
                 std::chrono::milliseconds timeout = timeout_from_env(), std::filesystem::path image_root = {});

  /// Throws DetectorUnavailable on transport failure, timeout, non-200 status
  /// or an unparseable body.
  std::vector<Detection> detect(const LogFrame& frame) override;

  /// TLR_DETECTOR_TIMEOUT_MS, default 500 ms.
  static std::chrono::milliseconds timeout_from_env();

  /// Drops entries that are malformed, have an unknown class or a confidence
  /// outside [0,1]; clips boxes to the image and drops those left empty.
  /// Output is sorted by descending confidence.
  static std::vector<Detection> sanitize(const nlohmann::json& response, int image_width, int image_height);

 private:
  std::string base_url_;
  int width_;
  int height_;
  double tau_;
  std::chrono::milliseconds timeout_;
  std::filesystem::path image_root_;
};

}  // namespace tlr
