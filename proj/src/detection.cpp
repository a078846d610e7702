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

#include "tlr/detection.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "tlr/error.hpp"

namespace tlr {

using detail::json;

json to_json(const Detection& d) {
  return {{"bbox", detail::to_json(d.bbox)}, {"class", to_string(d.cls)}, {"confidence", d.confidence}};
}

Detection detection_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) detail::fail(line, "detection must be an object");
  detail::reject_unknown(j, {"bbox", "class", "confidence"}, "detection", line);
  Detection d;
  d.bbox = detail::bbox(detail::field(j, "bbox", line), line);
  auto cls = parse_state_class(detail::string(detail::field(j, "class", line), "class", line));
  if (!cls) detail::fail(line, "class must be \"red\" or \"green\"");
  d.cls = *cls;
  d.confidence = detail::number(detail::field(j, "confidence", line), "confidence", line);
  if (d.confidence < 0.0 || d.confidence > 1.0) detail::fail(line, "confidence must lie in [0,1]");
  return d;
}

void NoiseModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(miss_base)) throw InvalidArgument("miss_base must lie in [0,1]");
  if (!(miss_area_scale >= 0.0)) throw InvalidArgument("miss_area_scale must be >= 0");
  if (!(center_jitter_sigma >= 0.0) || !(size_jitter_sigma >= 0.0))
    throw InvalidArgument("jitter sigmas must be >= 0");
  if (!(fp_rate >= 0.0)) throw InvalidArgument("fp_rate must be >= 0");
}

json to_json(const NoiseModel& m) {
  return {{"miss_base", m.miss_base},
          {"miss_area_scale", m.miss_area_scale},
          {"center_jitter_sigma", m.center_jitter_sigma},
          {"size_jitter_sigma", m.size_jitter_sigma},
          {"fp_rate", m.fp_rate},
          {"tp_confidence", {m.tp_confidence.alpha, m.tp_confidence.beta}},
          {"fp_confidence", {m.fp_confidence.alpha, m.fp_confidence.beta}},
          {"rng_seed", m.rng_seed}};
}

NoiseModel noise_model_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "noise model must be an object");
  detail::reject_unknown(j,
                         {"miss_base", "miss_area_scale", "center_jitter_sigma", "size_jitter_sigma", "fp_rate",
                          "tp_confidence", "fp_confidence", "rng_seed"},
                         "noise model", 0);
  NoiseModel m;
  auto num = [&](const char* key, double& out) {
    if (auto it = j.find(key); it != j.end()) out = detail::number(*it, key, 0);
  };
  auto beta = [&](const char* key, BetaParams& out) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_array() || it->size() != 2) throw ParseError(0, std::string(key) + " must be [alpha, beta]");
      out = {detail::number((*it)[0], key, 0), detail::number((*it)[1], key, 0)};
    }
  };
  num("miss_base", m.miss_base);
  num("miss_area_scale", m.miss_area_scale);
  num("center_jitter_sigma", m.center_jitter_sigma);
  num("size_jitter_sigma", m.size_jitter_sigma);
  num("fp_rate", m.fp_rate);
  beta("tp_confidence", m.tp_confidence);
  beta("fp_confidence", m.fp_confidence);
  if (auto it = j.find("rng_seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ParseError(0, "rng_seed must be a non-negative integer");
    m.rng_seed = it->get<std::uint64_t>();
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
  return m;
}

double miss_probability(const NoiseModel& m, double area) {
  const double size_term = m.miss_area_scale > 0.0 ? std::exp(-area / m.miss_area_scale) : 0.0;
  return std::clamp(m.miss_base + size_term, 0.0, 1.0);
}

ScriptedDetector::ScriptedDetector(NoiseModel noise, int image_width, int image_height,
                                   std::vector<std::pair<double, double>> size_pool)
    : noise_(noise), width_(image_width), height_(image_height), size_pool_(std::move(size_pool)),
      rng_(noise.rng_seed) {
  noise_.validate();
  if (width_ <= 0 || height_ <= 0) throw InvalidArgument("image size must be positive");
}

double ScriptedDetector::sample_confidence(const BetaParams& p) {
  if (p.alpha <= 0.0 || p.beta <= 0.0) return 1.0;
  std::gamma_distribution<double> ga(p.alpha, 1.0);
  std::gamma_distribution<double> gb(p.beta, 1.0);
  const double x = ga(rng_);
  const double y = gb(rng_);
  return x + y > 0.0 ? std::clamp(x / (x + y), 0.0, 1.0) : 0.5;
}

std::vector<Detection> ScriptedDetector::detect(const LogFrame& frame) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double w = width_;
  const double h = height_;

  std::vector<Detection> out;
  for (const GtDetection& gt : frame.gt_detections) {
    observed_sizes_.emplace_back(gt.bbox.width(), gt.bbox.height());
    if (unit(rng_) < miss_probability(noise_, gt.bbox.area())) continue;

    BoundingBox b = gt.bbox;
    if (noise_.center_jitter_sigma > 0.0 || noise_.size_jitter_sigma > 0.0) {
      const double cu = b.center_u() + noise_.center_jitter_sigma * normal(rng_);
      const double cv = b.center_v() + noise_.center_jitter_sigma * normal(rng_);
      const double bw = b.width() * std::max(0.1, 1.0 + noise_.size_jitter_sigma * normal(rng_));
      const double bh = b.height() * std::max(0.1, 1.0 + noise_.size_jitter_sigma * normal(rng_));
      b = {cu - 0.5 * bw, cv - 0.5 * bh, cu + 0.5 * bw, cv + 0.5 * bh};
    }
    b = b.clipped(w, h);
    const double confidence = sample_confidence(noise_.tp_confidence);
    if (b.valid()) out.push_back({b, gt.cls, confidence});
  }

  if (noise_.fp_rate > 0.0) {
    std::poisson_distribution<int> count(noise_.fp_rate);
    const int n = count(rng_);
    const auto& pool = size_pool_.empty() ? observed_sizes_ : size_pool_;
    for (int i = 0; i < n; ++i) {
      double bw = 10.0;
      double bh = 25.0;
      if (!pool.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        std::tie(bw, bh) = pool[pick(rng_)];
      }
      const double cu = unit(rng_) * w;
      const double cv = unit(rng_) * h;
      const StateClass cls = unit(rng_) < 0.5 ? StateClass::Red : StateClass::Green;
      const double confidence = sample_confidence(noise_.fp_confidence);
      BoundingBox b = BoundingBox{cu - 0.5 * bw, cv - 0.5 * bh, cu + 0.5 * bw, cv + 0.5 * bh}.clipped(w, h);
      if (b.valid()) out.push_back({b, cls, confidence});
    }
  }

  sort_by_confidence(out);
  return out;
}

void sort_by_confidence(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
}

std::vector<Detection> filter_by_confidence(std::span<const Detection> dets, double tau) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [tau](const Detection& d) { return d.confidence >= tau; });
  return out;
}

std::vector<std::pair<double, double>> gt_size_pool(std::span<const LogFrame> frames) {
  std::vector<std::pair<double, double>> pool;
  for (const auto& f : frames)
    for (const auto& g : f.gt_detections) pool.emplace_back(g.bbox.width(), g.bbox.height());
  return pool;
}

}  // namespace tlr
