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

#include "tlr/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "tlr/error.hpp"

namespace tlr {

void EvalConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw InvalidArgument("iou_threshold must lie in (0,1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0,1]");
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const GtDetection> gts,
                             double iou_threshold) {
  std::vector<Detection> ranked(dets.begin(), dets.end());
  sort_by_confidence(ranked);
  std::vector<bool> used(gts.size(), false);
  MatchResult r;
  for (const Detection& d : ranked) {
    std::optional<std::size_t> best;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].cls != d.cls) continue;
      const double o = iou(d.bbox, gts[g].bbox);
      if (o >= best_iou && (!best || o > best_iou)) {
        best = g;
        best_iou = o;
      }
    }
    if (best) {
      used[*best] = true;
      r.tp.push_back(d);
    } else {
      r.fp.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!used[g]) r.fn.push_back(gts[g]);
  return r;
}

PrCurve precision_recall(std::span<const ScoredMatch> matches, std::size_t n_gt) {
  std::vector<ScoredMatch> ranked(matches.begin(), matches.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) { return a.confidence > b.confidence; });
  PrCurve curve;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ++seen;
    tp += ranked[i].true_positive ? 1 : 0;
    // Only thresholds are observable, so equal confidences form one point.
    if (i + 1 < ranked.size() && ranked[i + 1].confidence == ranked[i].confidence) continue;
    curve.recall.push_back(n_gt ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0);
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
  }
  return curve;
}

double voc2007_ap(std::span<const ScoredMatch> matches, std::size_t n_gt) {
  if (n_gt == 0) throw NoGroundTruth("average precision is undefined without ground truth");
  const PrCurve c = precision_recall(matches, n_gt);
  double sum = 0.0;
  for (int level = 0; level <= 10; ++level) {
    const double r = level / 10.0;
    double p = 0.0;
    for (std::size_t i = 0; i < c.recall.size(); ++i)
      if (c.recall[i] >= r) p = std::max(p, c.precision[i]);
    sum += p;
  }
  return sum / 11.0;
}

double voc_ap_all_points(std::span<const ScoredMatch> matches, std::size_t n_gt) {
  if (n_gt == 0) throw NoGroundTruth("average precision is undefined without ground truth");
  const PrCurve c = precision_recall(matches, n_gt);
  std::vector<double> rec{0.0};
  std::vector<double> pre{0.0};
  rec.insert(rec.end(), c.recall.begin(), c.recall.end());
  pre.insert(pre.end(), c.precision.begin(), c.precision.end());
  rec.push_back(1.0);
  pre.push_back(0.0);
  for (std::size_t i = pre.size() - 1; i > 0; --i) pre[i - 1] = std::max(pre[i - 1], pre[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) ap += (rec[i] - rec[i - 1]) * pre[i];
  return ap;
}

std::optional<double> mean_ap(std::span<const std::optional<double>> per_class) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ap : per_class)
    if (ap) {
      sum += *ap;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

DetectionMetrics evaluate_detections(std::span<const std::vector<Detection>> dets_per_frame,
                                     std::span<const std::vector<GtDetection>> gts_per_frame, const EvalConfig& cfg) {
  cfg.validate();
  if (dets_per_frame.size() != gts_per_frame.size())
    throw LengthMismatch("detections and ground truth cover a different number of frames");

  std::array<std::vector<ScoredMatch>, 2> scored;
  std::array<std::size_t, 2> n_gt{};
  DetectionMetrics m;
  for (std::size_t f = 0; f < dets_per_frame.size(); ++f) {
    const auto all = match_detections(dets_per_frame[f], gts_per_frame[f], cfg.iou_threshold);
    for (const auto& d : all.tp) scored[static_cast<int>(d.cls)].push_back({d.confidence, true});
    for (const auto& d : all.fp) scored[static_cast<int>(d.cls)].push_back({d.confidence, false});
    for (const auto& g : gts_per_frame[f]) ++n_gt[static_cast<int>(g.cls)];

    const auto kept = filter_by_confidence(dets_per_frame[f], cfg.tau);
    const auto at_tau = match_detections(kept, gts_per_frame[f], cfg.iou_threshold);
    m.tp += at_tau.tp.size();
    m.fp += at_tau.fp.size();
    m.fn += at_tau.fn.size();
  }
  for (int c = 0; c < 2; ++c) {
    if (n_gt[c] == 0) {
      m.warnings.push_back(std::string("no ground truth for class ") + std::string(to_string(StateClass(c))) +
                           "; AP excluded from mAP");
      continue;
    }
    m.ap[c] = voc2007_ap(scored[c], n_gt[c]);
  }
  m.map = mean_ap(m.ap);
  m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  return m;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts_) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return n;
}

std::size_t ConfusionMatrix::row_total(FinalState gt) const {
  const auto& row = counts_[idx(gt)];
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

ConfusionMatrix confusion(std::span<const FinalState> predicted, std::span<const FinalState> gt) {
  if (predicted.size() != gt.size())
    throw LengthMismatch("predictions (" + std::to_string(predicted.size()) + ") and ground truth (" +
                         std::to_string(gt.size()) + ") differ in length");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < gt.size(); ++i) m.add(gt[i], predicted[i]);
  return m;
}

double frame_accuracy(std::span<const FinalState> predicted, std::span<const FinalState> gt) {
  if (predicted.size() != gt.size()) throw LengthMismatch("predictions and ground truth differ in length");
  if (gt.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) ok += predicted[i] == gt[i] ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(gt.size());
}

std::vector<EarlyDetectionRecord> early_detection(std::span<const ApproachFrame> frames) {
  std::vector<EarlyDetectionRecord> out;
  std::size_t i = 0;
  while (i < frames.size()) {
    if (!frames[i].group) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < frames.size() && frames[end].group == frames[i].group) ++end;

    EarlyDetectionRecord rec;
    rec.approach = *frames[i].group;
    rec.entry_t = frames[i].t;
    bool found = false;
    for (std::size_t k = i; k < end; ++k) {
      const auto& f = frames[k];
      if ((f.gt == FinalState::Red || f.gt == FinalState::Green) && f.predicted == f.gt) {
        rec.delay = f.t - rec.entry_t;
        rec.distance = f.distance;
        found = true;
        break;
      }
    }
    if (!found) {
      rec.delay = frames[end - 1].t - rec.entry_t;
      rec.distance = 0.0;
      rec.no_correct_prediction = true;
    }
    out.push_back(std::move(rec));
    i = end;
  }
  return out;
}

SystemReport evaluate_system(const SystemRun& run, std::span<const TruthFrame> truth) {
  if (run.predicted.size() != truth.size())
    throw LengthMismatch("run '" + run.label + "' has " + std::to_string(run.predicted.size()) +
                         " verdicts but the truth has " + std::to_string(truth.size()) + " frames");
  std::vector<FinalState> gt;
  std::vector<ApproachFrame> frames;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    gt.push_back(truth[i].gt_state);
    frames.push_back({truth[i].t, truth[i].gt_state, run.predicted[i], truth[i].group, truth[i].distance});
  }
  SystemReport r;
  r.label = run.label;
  r.confusion = confusion(run.predicted, gt);
  r.accuracy = frame_accuracy(run.predicted, gt);
  r.early = early_detection(frames);
  return r;
}

}  // namespace tlr
