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

#pragma once

#include <span>
#include <vector>

#include "tlr/geometry.hpp"
#include "tlr/log.hpp"
#include "tlr/mapping.hpp"

namespace tlr {

/// Schematic camera view of a frame: projected LiDAR returns, ground-truth
/// boxes and a cross per candidate (yellow pending, green accepted, red
/// rejected). Synthetic logs carry no imagery, so this stands in for it.
std::vector<unsigned char> render_overlay_png(const LogFrame& frame, const CameraModel& cam,
                                              std::span<const TLCandidate> candidates, int max_width = 640);

}  // namespace tlr
