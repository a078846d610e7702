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
/// Detection metrics (IoU matching, VOC average precision) and system metrics
/// (confusion matrices, first-correct-detection delay and distance).
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlr/detection.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/replay.hpp"
#include "tlr/state.hpp"

namespace tlr {

struct EvalConfig {
  double iou_threshold = 0.5;
  double tau = 0.5;

  void validate() const;
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct MatchResult {
  std::vector<Detection> tp;
  std::vector<Detection> fp;
  std::vector<GtDetection> fn;
};

/// Greedy VOC matching: detections in descending confidence each claim the
/// unmatched same-class ground truth with the highest IoU >= threshold.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GtDetection> gts,
                             double iou_threshold);

/// One ranked detection for AP computation.
struct ScoredMatch {
  double confidence = 0.0;
  bool true_positive = false;
};

/// Precision/recall points, one per distinct confidence (ties collapse).
struct PrCurve {
  std::vector<double> recall;
  std::vector<double> precision;
};

PrCurve precision_recall(std::span<const ScoredMatch> matches, std::size_t n_gt);

/// 11-point interpolated AP (VOC 2007). Throws NoGroundTruth when n_gt == 0.
double voc2007_ap(std::span<const ScoredMatch> matches, std::size_t n_gt);
/// All-points AP (VOC 2010+). Throws NoGroundTruth when n_gt == 0.
double voc_ap_all_points(std::span<const ScoredMatch> matches, std::size_t n_gt);

/// Unweighted mean of the defined per-class APs; nullopt when none is defined.
std::optional<double> mean_ap(std::span<const std::optional<double>> per_class);

struct DetectionMetrics {
  std::array<std::optional<double>, 2> ap;  // indexed by StateClass
  std::optional<double> map;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<std::string> warnings;
};

/// AP over all confidences; precision/recall at `cfg.tau`.
DetectionMetrics evaluate_detections(std::span<const std::vector<Detection>> dets_per_frame,
                                     std::span<const std::vector<GtDetection>> gts_per_frame, const EvalConfig& cfg);

class ConfusionMatrix {
 public:
  void add(FinalState gt, FinalState pred, std::size_t n = 1) { counts_[idx(gt)][idx(pred)] += n; }
  std::size_t at(FinalState gt, FinalState pred) const { return counts_[idx(gt)][idx(pred)]; }
  std::size_t total() const;
  std::size_t row_total(FinalState gt) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  static std::size_t idx(FinalState s) { return static_cast<std::size_t>(s); }
  std::array<std::array<std::size_t, 4>, 4> counts_{};
};

/// Throws LengthMismatch when the sequences differ in length.
ConfusionMatrix confusion(std::span<const FinalState> predicted, std::span<const FinalState> gt);

/// Fraction of frames where prediction equals ground truth.
double frame_accuracy(std::span<const FinalState> predicted, std::span<const FinalState> gt);

struct EarlyDetectionRecord {
  std::string approach;  // truth group id
  double entry_t = 0.0;
  double delay = 0.0;     // s since entering the activation range
  double distance = 0.0;  // m remaining at the first correct prediction
  bool no_correct_prediction = false;
};

/// Per-frame input to early_detection.
struct ApproachFrame {
  double t = 0.0;
  FinalState gt = FinalState::None;
  FinalState predicted = FinalState::None;
  std::optional<std::string> group;  // truth group in range, if any
  double distance = 0.0;
};

/// Segments approaches on changes of the in-range truth group and reports,
/// per approach, the first frame with gt in {RED, GREEN} and predicted == gt.
std::vector<EarlyDetectionRecord> early_detection(std::span<const ApproachFrame> frames);

// Reports -------------------------------------------------------------------

struct SystemRun {
  std::string label;
  std::vector<FinalState> predicted;
};

struct SystemReport {
  std::string label;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<EarlyDetectionRecord> early;
};

/// Aligns `predicted` against the truth timeline. Throws LengthMismatch.
SystemReport evaluate_system(const SystemRun& run, std::span<const TruthFrame> truth);

nlohmann::json to_json(const SystemReport& r);
nlohmann::json to_json(const DetectionMetrics& m);

/// Aligned-text tables: confusion matrices (rows = ground truth, columns =
/// prediction, order N R G O) and first correct detections.
std::string format_text_report(std::span<const SystemReport> reports, const DetectionMetrics* detection);

/// CSV with header `t,gt,pred_<label>...`.
std::string timeline_csv(std::span<const TruthFrame> truth, std::span<const SystemRun> runs);

}  // namespace tlr
