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
/// Offline prior-map construction: box-gated LiDAR accumulation, gap-triggered
/// density clustering and proximity grouping of curated lights.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tlr/detection.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/prior_map.hpp"

namespace tlr {

struct MappingConfig {
  /// Consecutive frames without detections that trigger clustering.
  std::size_t flush_gap_frames = 8;
  double dbscan_eps = 0.5;  // m
  std::size_t dbscan_min_pts = 6;
  double group_link_radius = 20.0;  // m
  /// Fraction of box extent removed before gating (0 keeps the box as is).
  double tight_bbox_shrink = 0.1;
  /// Confidence threshold applied to detections before gating.
  double tau = 0.5;

  void validate() const;
};

struct PointBuffer {
  std::vector<Vec3> points;  // world
  std::size_t gap_counter = 0;
  /// [first_t, last_t] of the frames that contributed points.
  std::optional<std::pair<double, double>> source_frame_range;
};

enum class CandidateStatus { Pending, Accepted, Rejected };

std::string_view to_string(CandidateStatus s);
std::optional<CandidateStatus> parse_candidate_status(std::string_view s);

struct TLCandidate {
  std::string id;
  Vec3 centroid = Vec3::Zero();
  std::size_t support = 0;
  std::pair<double, double> source_frame_range{0.0, 0.0};
  CandidateStatus status = CandidateStatus::Pending;
  std::optional<std::string> group_id;
  std::vector<std::string> relevant_for;
  /// Picked from a single frame by an operator rather than clustered.
  bool manual = false;

  bool operator==(const TLCandidate&) const = default;
};

/// Appends to `buffer` every LiDAR point whose projection falls inside one of
/// the (shrunk) boxes, in world coordinates. An empty `dets` increments the
/// gap counter, otherwise it is reset.
void accumulate_hits(const LogFrame& frame, std::span<const Detection> dets, const CameraModel& cam,
                     const MappingConfig& cfg, PointBuffer& buffer);

/// Clusters and empties the buffer once the gap counter reaches the flush
/// threshold. Returned candidates are PENDING and carry no id.
std::vector<TLCandidate> maybe_flush(PointBuffer& buffer, const MappingConfig& cfg);

/// Clusters the buffer unconditionally (end of log).
std::vector<TLCandidate> flush(PointBuffer& buffer, const MappingConfig& cfg);

/// Drives accumulation and flushing over a log, numbering candidates c0001...
class MapBuilder {
 public:
  MapBuilder(CameraModel cam, MappingConfig cfg);

  /// `dets` are raw detector output; the mapping tau is applied here.
  void process(const LogFrame& frame, std::span<const Detection> dets);
  /// Flushes what is left and returns every candidate produced so far.
  std::vector<TLCandidate> finish();

  const PointBuffer& buffer() const { return buffer_; }

 private:
  void adopt(std::vector<TLCandidate> fresh);

  CameraModel cam_;
  MappingConfig cfg_;
  PointBuffer buffer_;
  std::vector<TLCandidate> candidates_;
};

/// Single-linkage grouping: lights closer than `radius` (directly or through a
/// chain) share a group. Group ids are "g_" + the lowest member id.
std::vector<TLGroup> link_groups(std::span<const MapLight> lights, double radius);

/// Copies the lights relevant for `target_route` into a new map bound to it.
/// `overrides` force a light in (true) or out (false) regardless of its
/// current relevance list. Throws UnknownRoute when `target_route` is not in
/// `known_routes`.
PriorMap transfer_annotations(const PriorMap& map, const std::string& target_route,
                              const std::map<std::string, bool>& overrides,
                              std::span<const std::string> known_routes, double link_radius = 20.0);

// Candidate file: {"version": 1, "route_id": "...", "candidates": [...]}
struct CandidateSet {
  std::string route_id;
  std::vector<TLCandidate> candidates;
};

nlohmann::json to_json(const TLCandidate& c);
TLCandidate candidate_from_json(const nlohmann::json& j);
void save_candidates(const CandidateSet& set, const std::filesystem::path& path);
CandidateSet load_candidates(const std::filesystem::path& path);

/// Accepts every candidate for `route_id` and links groups automatically.
PriorMap auto_accept(std::span<const TLCandidate> candidates, const std::string& route_id, double link_radius);

}  // namespace tlr
