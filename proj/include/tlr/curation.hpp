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
/// Human curation of clustered candidates. Every mutation is an event in an
/// append-only log; the current state is the fold of that log over the
/// initial candidate set, so a journal on disk survives a crash.
#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/mapping.hpp"
#include "tlr/prior_map.hpp"

namespace tlr {

enum class Decision { Accept, Reject };

struct DecisionEvent {
  double timestamp = 0.0;  // wall clock, s since epoch
  std::string actor;
  /// "decide", "manual" or "save".
  std::string action;
  nlohmann::json payload;
};

nlohmann::json to_json(const DecisionEvent& e);
DecisionEvent decision_event_from_json(const nlohmann::json& j);

struct CurationOptions {
  std::string route_id;
  /// Destination of save(); also the key of the single-editor lock.
  std::optional<std::filesystem::path> map_path;
  /// Append-only event journal. Replayed on open when it already exists.
  std::optional<std::filesystem::path> journal_path;
  /// Source log, needed for manual candidates and overlays.
  std::shared_ptr<const std::vector<LogFrame>> log;
  std::optional<CameraModel> camera;
  double link_radius = 20.0;
};

struct SaveResult {
  PriorMap map;
  std::size_t dropped_pending = 0;
};

class CurationSession {
 public:
  /// Throws SessionLocked when another session holds the map.
  CurationSession(CandidateSet initial, CurationOptions options);
  ~CurationSession();
  CurationSession(const CurationSession&) = delete;
  CurationSession& operator=(const CurationSession&) = delete;

  /// Ordered by source time, then id.
  std::vector<TLCandidate> list_candidates() const;
  TLCandidate candidate(const std::string& id) const;

  TLCandidate decide(const std::string& id, Decision decision, const std::optional<std::string>& group,
                     const std::vector<std::string>& relevant_for, const std::string& actor = "operator");

  /// Lifts LiDAR point `point_index` of the frame at `t` into the world frame.
  TLCandidate manual_candidate(double t, std::size_t point_index, const std::string& actor = "operator");

  /// Current accepted lights as a map; pending candidates are left out.
  PriorMap draft_map() const;

  /// Throws PendingRemain unless `force`; writes `map_path` when configured.
  SaveResult save(bool force, const std::string& actor = "operator");

  std::vector<DecisionEvent> decision_log() const;
  const std::string& route_id() const { return options_.route_id; }

  /// Frame best suited to show `c`: inside its source range, centroid in view,
  /// vehicle closest. Requires a log and a camera.
  std::optional<double> overlay_frame(const TLCandidate& c) const;
  /// PNG bytes. Throws FrameNotFound.
  std::vector<unsigned char> overlay_png(double t) const;

  /// Folds `events` over `initial` and returns the map the last save would
  /// have written (or the current draft when nothing was saved).
  static PriorMap replay(const CandidateSet& initial, std::span<const DecisionEvent> events,
                         const CurationOptions& options);

 private:
  TLCandidate apply_decide(const std::string& id, Decision decision, const std::optional<std::string>& group,
                           const std::vector<std::string>& relevant_for);
  TLCandidate apply_manual(double t, std::size_t point_index);
  void record(DecisionEvent e);
  void apply(const DecisionEvent& e);
  PriorMap build_map() const;
  const LogFrame* find_frame(double t) const;
  TLCandidate* find(const std::string& id);

  CurationOptions options_;
  std::vector<TLCandidate> candidates_;
  std::vector<DecisionEvent> events_;
  std::size_t manual_count_ = 0;
  std::optional<std::filesystem::path> lock_path_;
  std::ofstream journal_;
  mutable std::shared_mutex mutex_;
};

}  // namespace tlr
