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

#include <cstdio>
#include <sstream>

#include "tlr/evaluation.hpp"

namespace tlr {

using nlohmann::json;

namespace {

// Row and column order of the confusion tables.
constexpr FinalState kTableOrder[] = {FinalState::None, FinalState::Red, FinalState::Green, FinalState::Off};

const char* row_label(FinalState s) {
  switch (s) {
    case FinalState::None: return "NONE (N)";
    case FinalState::Red: return "RED (R)";
    case FinalState::Green: return "GREEN (G)";
    case FinalState::Off: return "OFF (O)";
  }
  return "";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

json to_json(const SystemReport& r) {
  json rows = json::object();
  for (FinalState gt : kTableOrder) {
    json row = json::object();
    for (FinalState p : kTableOrder) row[std::string(to_string(p))] = r.confusion.at(gt, p);
    rows[std::string(to_string(gt))] = row;
  }
  json early = json::array();
  for (const auto& e : r.early)
    early.push_back({{"approach", e.approach},
                     {"entry_t", e.entry_t},
                     {"delay", e.delay},
                     {"distance", e.distance},
                     {"no_correct_prediction", e.no_correct_prediction}});
  return {{"label", r.label},
          {"frames", r.confusion.total()},
          {"accuracy", r.accuracy},
          {"confusion", rows},
          {"first_correct", early}};
}

json to_json(const DetectionMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"ap", {{"red", opt(m.ap[0])}, {"green", opt(m.ap[1])}}},
          {"map", opt(m.map)},
          {"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"precision", m.precision},
          {"recall", m.recall},
          {"warnings", m.warnings}};
}

std::string format_text_report(std::span<const SystemReport> reports, const DetectionMetrics* detection) {
  std::ostringstream out;
  if (detection) {
    out << "Detection (VOC 2007 11-point)\n";
    auto ap = [](const std::optional<double>& v) { return v ? fmt("%.4f", *v) : std::string("n/a"); };
    out << "  AP red-yellow " << ap(detection->ap[0]) << "   AP green " << ap(detection->ap[1]) << "   mAP "
        << ap(detection->map) << '\n';
    out << "  precision " << fmt("%.4f", detection->precision) << "   recall " << fmt("%.4f", detection->recall)
        << '\n';
    for (const auto& w : detection->warnings) out << "  warning: " << w << '\n';
    out << '\n';
  }

  for (const auto& r : reports) {
    out << "Confusion matrix [" << r.label << "]  rows: ground truth, columns: prediction\n";
    char line[160];
    std::snprintf(line, sizeof line, "%12s %7s %7s %7s %7s\n", "", "N", "R", "G", "O");
    out << line;
    for (FinalState gt : kTableOrder) {
      std::snprintf(line, sizeof line, "%12s %7zu %7zu %7zu %7zu\n", row_label(gt), r.confusion.at(gt, kTableOrder[0]),
                    r.confusion.at(gt, kTableOrder[1]), r.confusion.at(gt, kTableOrder[2]),
                    r.confusion.at(gt, kTableOrder[3]));
      out << line;
    }
    out << "  frame accuracy " << fmt("%.4f", r.accuracy) << "\n\n";
  }

  out << "First correct detections\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-16s %10s %10s\n", "run", "approach", "delay (s)", "dist (m)");
  out << line;
  for (const auto& r : reports)
    for (const auto& e : r.early) {
      std::snprintf(line, sizeof line, "%-12s %-16s %10.2f %10.2f%s\n", r.label.c_str(), e.approach.c_str(), e.delay,
                    e.distance, e.no_correct_prediction ? "  (never correct)" : "");
      out << line;
    }
  return out.str();
}

std::string timeline_csv(std::span<const TruthFrame> truth, std::span<const SystemRun> runs) {
  std::ostringstream out;
  out << "t,gt";
  for (const auto& r : runs) out << ",pred_" << r.label;
  out << '\n';
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << fmt("%.6f", truth[i].t) << ',' << to_string(truth[i].gt_state);
    for (const auto& r : runs) out << ',' << (i < r.predicted.size() ? to_string(r.predicted[i]) : "");
    out << '\n';
  }
  return out.str();
}

}  // namespace tlr
