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
/// Curated traffic-light map bound to a route.
///
/// File format (JSON, UTF-8, unknown fields rejected):
///   {"version": 1, "route_id": "...",
///    "lights": [{"id": "...", "position": [x,y,z], "relevant_for": ["..."]}],
///    "groups": [{"id": "...", "light_ids": ["..."]}]}
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlr/geometry.hpp"

namespace tlr {

inline constexpr int kPriorMapVersion = 1;

struct MapLight {
  std::string id;
  Vec3 position = Vec3::Zero();  // world
  std::vector<std::string> relevant_for;

  bool operator==(const MapLight&) const = default;
};

struct TLGroup {
  std::string id;
  std::vector<std::string> light_ids;

  bool operator==(const TLGroup&) const = default;
};

struct PriorMap {
  int version = kPriorMapVersion;
  std::string route_id;
  std::vector<MapLight> lights;
  std::vector<TLGroup> groups;

  const MapLight* find_light(const std::string& id) const;
  const TLGroup* find_group(const std::string& id) const;

  /// Throws InvalidMap when ids are duplicated or a group references an
  /// unknown light.
  void validate() const;

  bool operator==(const PriorMap&) const = default;
};

nlohmann::json to_json(const PriorMap& map);
PriorMap prior_map_from_json(const nlohmann::json& j);

PriorMap load_prior_map(const std::filesystem::path& path);
void save_prior_map(const PriorMap& map, const std::filesystem::path& path);

}  // namespace tlr
