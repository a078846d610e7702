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

#include "tlr/prior_map.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "tlr/error.hpp"

namespace tlr {

using detail::json;

const MapLight* PriorMap::find_light(const std::string& id) const {
  for (const auto& l : lights)
    if (l.id == id) return &l;
  return nullptr;
}

const TLGroup* PriorMap::find_group(const std::string& id) const {
  for (const auto& g : groups)
    if (g.id == id) return &g;
  return nullptr;
}

void PriorMap::validate() const {
  if (version != kPriorMapVersion) throw InvalidMap("unsupported prior map version " + std::to_string(version));
  std::set<std::string> ids;
  for (const auto& l : lights) {
    if (l.id.empty()) throw InvalidMap("light id must not be empty");
    if (!ids.insert(l.id).second) throw InvalidMap("duplicate light id '" + l.id + "'");
    if (!l.position.allFinite()) throw InvalidMap("light '" + l.id + "' has a non-finite position");
  }
  std::set<std::string> group_ids;
  for (const auto& g : groups) {
    if (!group_ids.insert(g.id).second) throw InvalidMap("duplicate group id '" + g.id + "'");
    if (g.light_ids.empty()) throw InvalidMap("group '" + g.id + "' is empty");
    for (const auto& lid : g.light_ids)
      if (!ids.count(lid)) throw InvalidMap("group '" + g.id + "' references unknown light '" + lid + "'");
  }
}

json to_json(const PriorMap& map) {
  json lights = json::array();
  for (const auto& l : map.lights)
    lights.push_back({{"id", l.id}, {"position", detail::to_json(l.position)}, {"relevant_for", l.relevant_for}});
  json groups = json::array();
  for (const auto& g : map.groups) groups.push_back({{"id", g.id}, {"light_ids", g.light_ids}});
  return {{"version", map.version}, {"route_id", map.route_id}, {"lights", lights}, {"groups", groups}};
}

namespace {

std::vector<std::string> string_list(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(0, std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(detail::string(s, what, 0));
  return out;
}

}  // namespace

PriorMap prior_map_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "prior map must be a JSON object");
  detail::reject_unknown(j, {"version", "route_id", "lights", "groups"}, "prior map", 0);
  const json& v = detail::field(j, "version", 0);
  if (!v.is_number_integer()) throw ParseError(0, "version must be an integer");
  if (v.get<int>() != kPriorMapVersion)
    throw VersionMismatch("prior map version " + v.dump() + " is not supported");

  PriorMap map;
  map.route_id = detail::string(detail::field(j, "route_id", 0), "route_id", 0);
  const json& lights = detail::field(j, "lights", 0);
  if (!lights.is_array()) throw ParseError(0, "lights must be an array");
  for (const json& l : lights) {
    if (!l.is_object()) throw ParseError(0, "light must be an object");
    detail::reject_unknown(l, {"id", "position", "relevant_for"}, "light", 0);
    MapLight ml;
    ml.id = detail::string(detail::field(l, "id", 0), "id", 0);
    ml.position = detail::vec3(detail::field(l, "position", 0), "position", 0);
    ml.relevant_for = string_list(detail::field(l, "relevant_for", 0), "relevant_for");
    map.lights.push_back(std::move(ml));
  }
  const json& groups = detail::field(j, "groups", 0);
  if (!groups.is_array()) throw ParseError(0, "groups must be an array");
  for (const json& g : groups) {
    if (!g.is_object()) throw ParseError(0, "group must be an object");
    detail::reject_unknown(g, {"id", "light_ids"}, "group", 0);
    map.groups.push_back({detail::string(detail::field(g, "id", 0), "id", 0),
                          string_list(detail::field(g, "light_ids", 0), "light_ids")});
  }
  map.validate();
  return map;
}

PriorMap load_prior_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prior map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return prior_map_from_json(detail::parse_document(ss.str(), 0));
}

void save_prior_map(const PriorMap& map, const std::filesystem::path& path) {
  map.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write prior map " + path.string());
  out << to_json(map).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tlr
