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

#include <string>

#include "json_util.hpp"
#include "tlr/error.hpp"
#include "tlr/log.hpp"

namespace tlr {

using detail::json;

bool operator==(const LogFrame& a, const LogFrame& b) {
  if (a.t != b.t || a.gt_state != b.gt_state || a.image_ref != b.image_ref || a.gt_detections != b.gt_detections)
    return false;
  if (a.pose.position != b.pose.position || a.pose.roll != b.pose.roll || a.pose.pitch != b.pose.pitch ||
      a.pose.yaw != b.pose.yaw)
    return false;
  return a.lidar == b.lidar;
}

std::string serialize_frame(const LogFrame& frame) {
  json lidar = json::array();
  auto& arr = lidar.get_ref<json::array_t&>();
  arr.reserve(frame.lidar.size() * 3);
  for (const Vec3& p : frame.lidar) {
    arr.emplace_back(p.x());
    arr.emplace_back(p.y());
    arr.emplace_back(p.z());
  }
  json dets = json::array();
  for (const auto& d : frame.gt_detections)
    dets.push_back({{"bbox", detail::to_json(d.bbox)}, {"class", to_string(d.cls)}, {"light", d.light_id}});

  json j = {{"t", frame.t},
            {"pose", detail::to_json(frame.pose)},
            {"lidar", std::move(lidar)},
            {"gt_detections", std::move(dets)},
            {"gt_state", to_string(frame.gt_state)},
            {"image_ref", frame.image_ref ? json(*frame.image_ref) : json(nullptr)}};
  return j.dump();
}

LogFrame parse_frame(std::string_view text, std::size_t line) {
  const json j = detail::parse_document(text, line);
  if (!j.is_object()) detail::fail(line, "frame must be a JSON object");
  detail::reject_unknown(j, {"t", "pose", "lidar", "gt_detections", "gt_state", "image_ref"}, "frame", line);

  LogFrame f;
  f.t = detail::number(detail::field(j, "t", line), "t", line);
  f.pose = detail::pose(detail::field(j, "pose", line), line);

  const json& lidar = detail::field(j, "lidar", line);
  if (!lidar.is_array() || lidar.size() % 3 != 0) detail::fail(line, "lidar must be a flat array of x,y,z triples");
  f.lidar.reserve(lidar.size() / 3);
  for (std::size_t i = 0; i < lidar.size(); i += 3)
    f.lidar.emplace_back(detail::number(lidar[i], "lidar", line), detail::number(lidar[i + 1], "lidar", line),
                         detail::number(lidar[i + 2], "lidar", line));

  const json& dets = detail::field(j, "gt_detections", line);
  if (!dets.is_array()) detail::fail(line, "gt_detections must be an array");
  for (const json& d : dets) {
    if (!d.is_object()) detail::fail(line, "gt_detection must be an object");
    detail::reject_unknown(d, {"bbox", "class", "light"}, "gt_detection", line);
    GtDetection g;
    g.bbox = detail::bbox(detail::field(d, "bbox", line), line);
    auto cls = parse_state_class(detail::string(detail::field(d, "class", line), "class", line));
    if (!cls) detail::fail(line, "class must be \"red\" or \"green\"");
    g.cls = *cls;
    g.light_id = detail::string(detail::field(d, "light", line), "light", line);
    f.gt_detections.push_back(std::move(g));
  }

  auto state = parse_final_state(detail::string(detail::field(j, "gt_state", line), "gt_state", line));
  if (!state) detail::fail(line, "gt_state must be one of none/off/red/green");
  f.gt_state = *state;

  if (auto it = j.find("image_ref"); it != j.end() && !it->is_null())
    f.image_ref = detail::string(*it, "image_ref", line);
  return f;
}

LogWriter::LogWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  out_ << json{{"version", kLogFormatVersion}}.dump() << '\n';
}

void LogWriter::write(const LogFrame& frame) {
  if (last_t_ && !(frame.t > *last_t_)) throw InvalidArgument("log timestamps must be strictly increasing");
  last_t_ = frame.t;
  out_ << serialize_frame(frame) << '\n';
  if (!out_) throw IoError("write failed");
}

LogReader::LogReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
}

std::optional<LogFrame> LogReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!seen_content_) {
      seen_content_ = true;
      // A header line carries only the format version.
      if (text.find("\"t\"") == std::string::npos) {
        const json h = detail::parse_document(text, line_);
        if (h.is_object() && h.contains("version")) {
          detail::reject_unknown(h, {"version"}, "log header", line_);
          const json& v = h["version"];
          if (!v.is_number_integer() || v.get<int>() != kLogFormatVersion)
            throw VersionMismatch("log format version " + v.dump() + " is not supported (expected " +
                                  std::to_string(kLogFormatVersion) + ")");
          continue;
        }
      }
    }
    LogFrame frame = parse_frame(text, line_);
    if (last_t_ && !(frame.t > *last_t_)) detail::fail(line_, "timestamps must be strictly increasing");
    last_t_ = frame.t;
    return frame;
  }
  return std::nullopt;
}

std::vector<LogFrame> read_log(const std::filesystem::path& path) {
  LogReader reader(path);
  std::vector<LogFrame> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

void write_log(std::span<const LogFrame> frames, const std::filesystem::path& path) {
  LogWriter writer(path);
  for (const auto& f : frames) writer.write(f);
}

}  // namespace tlr
