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

#include <random>

#include "doctest.h"
#include "tlr/detection.hpp"
#include "tlr/error.hpp"

using namespace tlr;

namespace {

LogFrame frame_with_two_lights() {
  LogFrame f;
  f.t = 1.0;
  f.gt_detections = {{{100, 100, 110, 125}, StateClass::Red, "a"}, {{300, 50, 320, 100}, StateClass::Green, "b"}};
  return f;
}

}  // namespace

TEST_CASE("noiseless scripted detector reproduces ground truth") {
  ScriptedDetector det(NoiseModel{}, 640, 480);
  const LogFrame f = frame_with_two_lights();
  const auto out = det.detect(f);
  REQUIRE(out.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out[i].bbox == f.gt_detections[i].bbox);
    CHECK(out[i].cls == f.gt_detections[i].cls);
    CHECK(out[i].confidence == 1.0);
  }
}

TEST_CASE("scripted detector is deterministic per seed") {
  NoiseModel n;
  n.miss_base = 0.2;
  n.center_jitter_sigma = 2.0;
  n.size_jitter_sigma = 0.1;
  n.fp_rate = 1.5;
  n.tp_confidence = {5, 2};
  n.fp_confidence = {2, 5};
  n.rng_seed = 99;
  ScriptedDetector a(n, 640, 480), b(n, 640, 480);
  const LogFrame f = frame_with_two_lights();
  for (int i = 0; i < 50; ++i) CHECK(a.detect(f) == b.detect(f));
  NoiseModel other = n;
  other.rng_seed = 100;
  ScriptedDetector c(n, 640, 480), e(other, 640, 480);
  bool differs = false;
  for (int i = 0; i < 20; ++i) differs |= c.detect(f) != e.detect(f);
  CHECK(differs);
}

TEST_CASE("total dropout") {
  NoiseModel n;
  n.miss_base = 1.0;
  ScriptedDetector det(n, 640, 480);
  CHECK(det.detect(frame_with_two_lights()).empty());
}

TEST_CASE("output is sorted, in bounds and in [0,1] under heavy noise") {
  NoiseModel n;
  n.center_jitter_sigma = 40.0;
  n.size_jitter_sigma = 0.5;
  n.fp_rate = 4.0;
  n.tp_confidence = {2, 2};
  n.fp_confidence = {1, 3};
  n.rng_seed = 5;
  ScriptedDetector det(n, 640, 480, {{10, 25}, {400, 400}});
  LogFrame f = frame_with_two_lights();
  f.gt_detections.push_back({{0, 0, 8, 20}, StateClass::Red, "edge"});
  f.gt_detections.push_back({{630, 470, 640, 480}, StateClass::Green, "corner"});
  for (int i = 0; i < 500; ++i) {
    const auto out = det.detect(f);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto& d = out[k];
      REQUIRE(d.bbox.valid());
      REQUIRE(d.bbox.x_min >= 0.0);
      REQUIRE(d.bbox.y_min >= 0.0);
      REQUIRE(d.bbox.x_max <= 640.0);
      REQUIRE(d.bbox.y_max <= 480.0);
      REQUIRE(d.confidence >= 0.0);
      REQUIRE(d.confidence <= 1.0);
      if (k > 0) REQUIRE(out[k - 1].confidence >= d.confidence);
    }
  }
}

TEST_CASE("miss probability model") {
  NoiseModel n;
  CHECK(miss_probability(n, 10.0) == 0.0);
  n.miss_base = 0.1;
  n.miss_area_scale = 100.0;
  CHECK(miss_probability(n, 0.0) == 1.0);
  CHECK(miss_probability(n, 100.0) == doctest::Approx(0.1 + std::exp(-1.0)));
  CHECK(miss_probability(n, 50.0) > miss_probability(n, 500.0));
}

TEST_CASE("small boxes are missed more often") {
  NoiseModel n;
  n.miss_area_scale = 200.0;
  n.rng_seed = 11;
  ScriptedDetector det(n, 640, 480);
  LogFrame small, large;
  small.gt_detections = {{{10, 10, 16, 26}, StateClass::Red, "s"}};     // 96 px^2
  large.gt_detections = {{{10, 10, 40, 90}, StateClass::Red, "l"}};     // 2400 px^2
  int hits_small = 0, hits_large = 0;
  for (int i = 0; i < 2000; ++i) {
    hits_small += static_cast<int>(det.detect(small).size());
    hits_large += static_cast<int>(det.detect(large).size());
  }
  CHECK(hits_small < hits_large);
  CHECK(hits_small == doctest::Approx(2000 * (1 - std::exp(-96.0 / 200))).epsilon(0.1));
}

TEST_CASE("filter_by_confidence") {
  std::vector<Detection> d = {{{0, 0, 1, 1}, StateClass::Red, 0.6}, {{0, 0, 1, 1}, StateClass::Green, 0.4}};
  auto f = filter_by_confidence(d, 0.5);
  REQUIRE(f.size() == 1);
  CHECK(f[0].confidence == 0.6);
  CHECK(filter_by_confidence(d, 0.0) == d);
  CHECK(filter_by_confidence(d, 0.6).size() == 1);  // inclusive

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> dets(20);
    for (auto& x : dets) x = {{0, 0, 1, 1}, StateClass::Red, u(rng)};
    const double t1 = u(rng), t2 = t1 + (1 - t1) * u(rng);
    const auto hi = filter_by_confidence(dets, t2);
    const auto lo = filter_by_confidence(dets, t1);
    for (const auto& h : hi) CHECK(std::find(lo.begin(), lo.end(), h) != lo.end());
  }
}

TEST_CASE("noise model JSON") {
  NoiseModel n;
  n.miss_base = 0.05;
  n.miss_area_scale = 120;
  n.fp_rate = 0.5;
  n.tp_confidence = {8, 2};
  n.rng_seed = 7;
  const NoiseModel back = noise_model_from_json(to_json(n));
  CHECK(back.miss_base == n.miss_base);
  CHECK(back.tp_confidence.alpha == 8);
  CHECK(back.rng_seed == 7);
  CHECK_THROWS_AS(noise_model_from_json(nlohmann::json{{"bogus", 1}}), ParseError);
  CHECK_THROWS_AS(noise_model_from_json(nlohmann::json{{"miss_base", 2.0}}), ParseError);
  CHECK_THROWS_AS(noise_model_from_json(nlohmann::json{{"center_jitter_sigma", -1.0}}), ParseError);
}

TEST_CASE("detection JSON") {
  const Detection d{{1, 2, 3, 4}, StateClass::Green, 0.25};
  CHECK(detection_from_json(to_json(d)) == d);
  CHECK_THROWS_AS(detection_from_json(nlohmann::json{{"bbox", {1, 2, 3, 4}}, {"class", "yellow"}, {"confidence", 1}}),
                  ParseError);
}
