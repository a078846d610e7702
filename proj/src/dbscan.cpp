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

#include "tlr/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "tlr/error.hpp"

namespace tlr {
namespace {

// Uniform hash grid with cell size eps; a radius query visits 27 cells.
class GridIndex {
 public:
  GridIndex(std::span<const Vec3> points, double eps) : points_(points), eps_(eps), eps2_(eps * eps) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  void neighbors(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const auto c = cell_of(points_[i]);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second)
            if ((points_[j] - points_[i]).squaredNorm() <= eps2_) out.push_back(j);
        }
    std::sort(out.begin(), out.end());
  }

 private:
  using Cell = std::array<std::int64_t, 3>;

  Cell cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / eps_)), static_cast<std::int64_t>(std::floor(p.y() / eps_)),
            static_cast<std::int64_t>(std::floor(p.z() / eps_))};
  }

  static std::uint64_t key(const Cell& c) {
    // 21 bits per axis is plenty for desk-scale maps.
    constexpr std::uint64_t mask = (1ULL << 21) - 1;
    return ((static_cast<std::uint64_t>(c[0]) & mask) << 42) | ((static_cast<std::uint64_t>(c[1]) & mask) << 21) |
           (static_cast<std::uint64_t>(c[2]) & mask);
  }

  std::span<const Vec3> points_;
  double eps_;
  double eps2_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

constexpr int kUnvisited = -2;
constexpr int kNoise = -1;

}  // namespace

DbscanResult dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw InvalidArgument("dbscan eps must be positive");
  if (min_pts < 1) throw InvalidArgument("dbscan min_pts must be >= 1");

  const GridIndex index(points, eps);
  DbscanResult result;
  result.labels.assign(points.size(), kUnvisited);
  auto& labels = result.labels;

  std::vector<std::size_t> hood;
  std::vector<std::size_t> queue;
  int next_cluster = 0;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kUnvisited) continue;
    index.neighbors(i, hood);
    if (hood.size() < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int c = next_cluster++;
    labels[i] = c;
    queue.assign(hood.begin(), hood.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t q = queue[head];
      if (labels[q] == kNoise) labels[q] = c;  // border point
      if (labels[q] != kUnvisited) continue;
      labels[q] = c;
      index.neighbors(q, hood);
      if (hood.size() >= min_pts) queue.insert(queue.end(), hood.begin(), hood.end());
    }
  }

  result.clusters.resize(next_cluster);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] >= 0)
      result.clusters[labels[i]].push_back(i);
    else
      result.noise.push_back(i);
  }
  return result;
}

}  // namespace tlr
