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

// Internal helpers shared by the JSON readers.
#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tlr/error.hpp"
#include "tlr/geometry.hpp"

namespace tlr::detail {

using nlohmann::json;

[[noreturn]] inline void fail(std::size_t line, const std::string& what) { throw ParseError(line, what); }

inline const json& field(const json& obj, std::string_view key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(line, "missing field '" + std::string(key) + "'");
  return *it;
}

inline double number(const json& j, std::string_view what, std::size_t line) {
  if (!j.is_number()) fail(line, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(line, std::string(what) + " must be finite");
  return v;
}

inline std::string string(const json& j, std::string_view what, std::size_t line) {
  if (!j.is_string()) fail(line, std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view ctx,
                           std::size_t line) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(line, "unknown field '" + it.key() + "' in " + std::string(ctx));
  }
}

inline Vec3 vec3(const json& j, std::string_view what, std::size_t line) {
  if (!j.is_array() || j.size() != 3) fail(line, std::string(what) + " must be [x,y,z]");
  return {number(j[0], what, line), number(j[1], what, line), number(j[2], what, line)};
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline BoundingBox bbox(const json& j, std::size_t line) {
  if (!j.is_array() || j.size() != 4) fail(line, "bbox must be [x_min,y_min,x_max,y_max]");
  BoundingBox b{number(j[0], "bbox", line), number(j[1], "bbox", line), number(j[2], "bbox", line),
                number(j[3], "bbox", line)};
  if (!b.valid()) fail(line, "bbox must satisfy x_min<x_max and y_min<y_max");
  return b;
}

inline json to_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

inline Pose6D pose(const json& j, std::size_t line) {
  if (!j.is_array() || j.size() != 6) fail(line, "pose must be [x,y,z,roll,pitch,yaw]");
  double v[6];
  for (int i = 0; i < 6; ++i) v[i] = number(j[i], "pose", line);
  return Pose6D(Vec3(v[0], v[1], v[2]), v[3], v[4], v[5]);
}

inline json to_json(const Pose6D& p) {
  return json::array({p.position.x(), p.position.y(), p.position.z(), p.roll, p.pitch, p.yaw});
}

inline json parse_document(std::string_view text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace tlr::detail
