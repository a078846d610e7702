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
/// Two-class traffic-light detections and the detector interface.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/state.hpp"

namespace tlr {

struct Detection {
  BoundingBox bbox;
  StateClass cls = StateClass::Red;
  double confidence = 1.0;

  bool operator==(const Detection&) const = default;
};

nlohmann::json to_json(const Detection& d);
/// Throws ParseError when the object is malformed.
Detection detection_from_json(const nlohmann::json& j, std::size_t line = 0);

/// Beta(alpha, beta). Non-positive parameters mean "always 1.0".
struct BetaParams {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Error model of the scripted detector. All-zero reproduces ground truth.
struct NoiseModel {
  double miss_base = 0.0;
  /// px^2; the miss probability rises by exp(-area / scale). Zero disables.
  double miss_area_scale = 0.0;
  double center_jitter_sigma = 0.0;  // px
  double size_jitter_sigma = 0.0;    // fraction of width/height
  double fp_rate = 0.0;              // expected false positives per frame
  BetaParams tp_confidence;
  BetaParams fp_confidence;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

nlohmann::json to_json(const NoiseModel& m);
NoiseModel noise_model_from_json(const nlohmann::json& j);

/// clamp(miss_base + exp(-area / miss_area_scale), 0, 1)
double miss_probability(const NoiseModel& m, double area);

class Detector {
 public:
  virtual ~Detector() = default;
  /// Detections sorted by descending confidence, all within image bounds.
  virtual std::vector<Detection> detect(const LogFrame& frame) = 0;
};

/// Replays ground-truth annotations through a NoiseModel. Owns its RNG; a
/// single instance must not be shared between threads.
class ScriptedDetector : public Detector {
 public:
  /// `size_pool` holds (width, height) samples for false positives. When empty
  /// the sizes of ground-truth boxes seen so far are used.
  ScriptedDetector(NoiseModel noise, int image_width, int image_height,
                   std::vector<std::pair<double, double>> size_pool = {});

  std::vector<Detection> detect(const LogFrame& frame) override;

 private:
  double sample_confidence(const BetaParams& p);

  NoiseModel noise_;
  int width_;
  int height_;
  std::vector<std::pair<double, double>> size_pool_;
  std::vector<std::pair<double, double>> observed_sizes_;
  std::mt19937_64 rng_;
};

/// Stable sort, highest confidence first.
void sort_by_confidence(std::vector<Detection>& dets);

/// The subset with confidence >= tau, order preserved.
std::vector<Detection> filter_by_confidence(std::span<const Detection> dets, double tau);

/// (width, height) of every ground-truth box in `frames`.
std::vector<std::pair<double, double>> gt_size_pool(std::span<const LogFrame> frames);

}  // namespace tlr
