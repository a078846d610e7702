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
/// Sensor log data model and the JSONL reader/writer.
///
/// A log file is UTF-8 JSON Lines. The first line may be a header
/// `{"version": 1}`; every other line is one frame:
///   {"t": s, "pose": [x,y,z,roll,pitch,yaw], "lidar": [x1,y1,z1,...],
///    "gt_detections": [{"bbox": [x0,y0,x1,y1], "class": "red", "light": "id"}],
///    "gt_state": "none"|"off"|"red"|"green", "image_ref": string|null}
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlr/geometry.hpp"
#include "tlr/state.hpp"

namespace tlr {

inline constexpr int kLogFormatVersion = 1;

struct GtDetection {
  BoundingBox bbox;
  StateClass cls = StateClass::Red;
  std::string light_id;

  bool operator==(const GtDetection&) const = default;
};

struct LogFrame {
  double t = 0.0;
  Pose6D pose;
  /// Vehicle frame, meters.
  std::vector<Vec3> lidar;
  std::vector<GtDetection> gt_detections;
  std::optional<std::string> image_ref;
  FinalState gt_state = FinalState::None;
};

bool operator==(const LogFrame& a, const LogFrame& b);

/// One frame as a single canonical JSON line (no trailing newline).
std::string serialize_frame(const LogFrame& frame);
/// Parses one frame line; `line` is only used for error reporting.
LogFrame parse_frame(std::string_view text, std::size_t line = 0);

class LogWriter {
 public:
  explicit LogWriter(const std::filesystem::path& path);
  void write(const LogFrame& frame);

 private:
  std::ofstream out_;
  std::optional<double> last_t_;
};

/// Streams frames; enforces strictly increasing timestamps.
class LogReader {
 public:
  explicit LogReader(const std::filesystem::path& path);
  std::optional<LogFrame> next();
  std::size_t line() const { return line_; }

 private:
  std::ifstream in_;
  std::size_t line_ = 0;
  bool seen_content_ = false;
  std::optional<double> last_t_;
};

std::vector<LogFrame> read_log(const std::filesystem::path& path);
void write_log(std::span<const LogFrame> frames, const std::filesystem::path& path);

}  // namespace tlr
