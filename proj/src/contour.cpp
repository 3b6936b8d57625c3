// Copyright 2026 The mtriage Authors.
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

#include "mtriage/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace mtriage {

namespace {

struct Segment {
  long long a, b;  // edge keys
};

}  // namespace

std::vector<Polyline> marching_squares(const std::vector<double>& values, int nx, int ny, double x0, double y0,
                                       double dx, double dy, double level) {
  auto at = [&](int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; };
  auto inside = [&](int ix, int iy) { return at(ix, iy) >= level; };
  auto h_key = [&](int ix, int iy) { return 2LL * (static_cast<long long>(iy) * nx + ix); };
  auto v_key = [&](int ix, int iy) { return 2LL * (static_cast<long long>(iy) * nx + ix) + 1; };

  std::unordered_map<long long, Point2> crossing;
  auto edge_point = [&](long long key) {
    const auto it = crossing.find(key);
    if (it != crossing.end()) return it->second;
    const long long cell = key / 2;
    const int ix = static_cast<int>(cell % nx);
    const int iy = static_cast<int>(cell / nx);
    const bool horizontal = key % 2 == 0;
    const double v0 = at(ix, iy);
    const double v1 = horizontal ? at(ix + 1, iy) : at(ix, iy + 1);
    const double t = (level - v0) / (v1 - v0);
    const Point2 p = horizontal ? Point2{x0 + (ix + t) * dx, y0 + iy * dy} : Point2{x0 + ix * dx, y0 + (iy + t) * dy};
    crossing.emplace(key, p);
    return p;
  };

  std::vector<Segment> segments;
  for (int iy = 0; iy + 1 < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const int code = (inside(ix, iy) ? 1 : 0) | (inside(ix + 1, iy) ? 2 : 0) | (inside(ix + 1, iy + 1) ? 4 : 0) |
                       (inside(ix, iy + 1) ? 8 : 0);
      if (code == 0 || code == 15) continue;
      const long long bottom = h_key(ix, iy), top = h_key(ix, iy + 1);
      const long long left = v_key(ix, iy), right = v_key(ix + 1, iy);
      if (code == 5 || code == 10) {
        const double center = 0.25 * (at(ix, iy) + at(ix + 1, iy) + at(ix + 1, iy + 1) + at(ix, iy + 1));
        const bool center_in = center >= level;
        // Separate the corners that are not connected through the center.
        if ((code == 5) == center_in) {
          segments.push_back({bottom, right});
          segments.push_back({top, left});
        } else {
          segments.push_back({bottom, left});
          segments.push_back({right, top});
        }
        continue;
      }
      std::array<long long, 2> ends{};
      int n = 0;
      const bool a = code & 1, b = code & 2, c = code & 4, d = code & 8;
      if (a != b) ends[n++] = bottom;
      if (b != c) ends[n++] = right;
      if (c != d) ends[n++] = top;
      if (d != a) ends[n++] = left;
      segments.push_back({ends[0], ends[1]});
    }
  }

  std::unordered_map<long long, std::array<int, 2>> incident;
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    for (const long long key : {segments[i].a, segments[i].b}) {
      auto [it, fresh] = incident.try_emplace(key, std::array<int, 2>{-1, -1});
      (it->second[0] < 0 ? it->second[0] : it->second[1]) = i;
    }
  }
  auto degree = [&](long long key) {
    const auto& inc = incident.at(key);
    return (inc[0] >= 0) + (inc[1] >= 0);
  };

  std::vector<char> used(segments.size(), 0);
  std::vector<Polyline> lines;
  auto walk = [&](int start, long long from) {
    Polyline line{edge_point(from)};
    int seg = start;
    long long key = from;
    while (seg >= 0 && !used[seg]) {
      used[seg] = 1;
      key = segments[seg].a == key ? segments[seg].b : segments[seg].a;
      line.push_back(edge_point(key));
      const auto& inc = incident.at(key);
      seg = inc[0] == seg ? inc[1] : inc[0];
    }
    lines.push_back(std::move(line));
  };
  // Open chains first, starting from boundary edges, then the closed loops.
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    if (used[i]) continue;
    if (degree(segments[i].a) == 1) walk(i, segments[i].a);
    else if (degree(segments[i].b) == 1) walk(i, segments[i].b);
  }
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    if (!used[i]) walk(i, segments[i].a);
  }
  return lines;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(values.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ContourLevel> grid_contours(const FamiliarityGrid& grid, const std::vector<double>& percentiles) {
  std::vector<ContourLevel> out;
  const double w = grid.cell_width(), h = grid.cell_height();
  const auto& b = grid.bounds();
  for (const double p : percentiles) {
    ContourLevel level;
    level.percentile = p;
    level.level = percentile(grid.values(), p);
    level.polylines = marching_squares(grid.values(), grid.density(), grid.density(), b.min_x + 0.5 * w,
                                       b.min_y + 0.5 * h, w, h, level.level);
    out.push_back(std::move(level));
  }
  return out;
}

}  // namespace mtriage
