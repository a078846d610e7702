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

#include "tlr/remote_detector.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "httplib.h"
#include "tlr/error.hpp"

namespace tlr {

using nlohmann::json;

RemoteDetector::RemoteDetector(std::string base_url, int image_width, int image_height, double tau,
                               std::chrono::milliseconds timeout, std::filesystem::path image_root)
    : base_url_(std::move(base_url)), width_(image_width), height_(image_height), tau_(tau), timeout_(timeout),
      image_root_(std::move(image_root)) {
  if (width_ <= 0 || height_ <= 0) throw InvalidArgument("image size must be positive");
  if (!(tau_ >= 0.0 && tau_ <= 1.0)) throw InvalidArgument("tau must lie in [0,1]");
}

std::chrono::milliseconds RemoteDetector::timeout_from_env() {
  if (const char* v = std::getenv("TLR_DETECTOR_TIMEOUT_MS")) {
    char* end = nullptr;
    const long ms = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && ms > 0) return std::chrono::milliseconds(ms);
  }
  return std::chrono::milliseconds(500);
}

std::vector<Detection> RemoteDetector::sanitize(const json& response, int image_width, int image_height) {
  std::vector<Detection> out;
  if (!response.is_object()) return out;
  auto it = response.find("detections");
  if (it == response.end() || !it->is_array()) return out;

  for (const json& d : *it) {
    if (!d.is_object()) continue;
    auto bb = d.find("bbox");
    auto cl = d.find("class");
    auto cf = d.find("confidence");
    if (bb == d.end() || cl == d.end() || cf == d.end()) continue;
    if (!bb->is_array() || bb->size() != 4 || !cl->is_string() || !cf->is_number()) continue;

    double c[4];
    bool finite = true;
    for (int i = 0; i < 4; ++i) {
      if (!(*bb)[i].is_number()) {
        finite = false;
        break;
      }
      c[i] = (*bb)[i].get<double>();
      finite = finite && std::isfinite(c[i]);
    }
    if (!finite) continue;

    auto cls = parse_state_class(cl->get<std::string>());
    const double conf = cf->get<double>();
    if (!cls || !(conf >= 0.0 && conf <= 1.0)) continue;

    BoundingBox box = BoundingBox{c[0], c[1], c[2], c[3]}.clipped(image_width, image_height);
    if (!box.valid()) continue;
    out.push_back({box, *cls, conf});
  }
  sort_by_confidence(out);
  return out;
}

std::vector<Detection> RemoteDetector::detect(const LogFrame& frame) {
  if (!frame.image_ref) throw DetectorUnavailable("frame has no image_ref for the remote detector");
  std::filesystem::path image = *frame.image_ref;
  if (image.is_relative() && !image_root_.empty()) image = image_root_ / image;
  std::ifstream in(image, std::ios::binary);
  if (!in) throw DetectorUnavailable("cannot read image " + image.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  httplib::Client client(base_url_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const json request = {{"image_b64", httplib::detail::base64_encode(bytes)}, {"tau", tau_}};
  auto res = client.Post("/detect", request.dump(), "application/json");
  if (!res) throw DetectorUnavailable("detector at " + base_url_ + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw DetectorUnavailable("detector at " + base_url_ + " returned HTTP " + std::to_string(res->status));

  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw DetectorUnavailable("detector at " + base_url_ + " returned invalid JSON");
  }
  return sanitize(body, width_, height_);
}

}  // namespace tlr
