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

#include <cstddef>
#include <span>
#include <vector>

#include "tlr/geometry.hpp"

namespace tlr {

struct DbscanResult {
  /// Point indices per cluster, ascending; clusters ordered by their seed.
  std::vector<std::vector<std::size_t>> clusters;
  /// Indices that belong to no cluster, ascending.
  std::vector<std::size_t> noise;
  /// Cluster index per point, -1 for noise.
  std::vector<int> labels;
};

/// Density clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Points are scanned in index order and
/// clusters grow breadth-first, so a border point reachable from two clusters
/// goes to the one seeded first.
DbscanResult dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts);

}  // namespace tlr
