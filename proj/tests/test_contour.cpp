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

#include <gtest/gtest.h>

#include <cmath>

#include "mtriage/contour.hpp"

using namespace mtriage;

namespace {

// exp(-r^2 / 2) sampled on [-3, 3]^2.
std::vector<double> gaussian_field(int n, double& step) {
  step = 6.0 / (n - 1);
  std::vector<double> v;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double x = -3 + ix * step, y = -3 + iy * step;
      v.push_back(std::exp(-0.5 * (x * x + y * y)));
    }
  }
  return v;
}

bool on_boundary(Point2 p, double lo, double hi) {
  const double eps = 1e-9;
  return std::abs(p.x - lo) < eps || std::abs(p.x - hi) < eps || std::abs(p.y - lo) < eps || std::abs(p.y - hi) < eps;
}

}  // namespace

TEST(Contour, GaussianGivesNestedClosedCircles) {
  double step = 0;
  const int n = 61;
  const auto field = gaussian_field(n, step);
  double previous_radius = 1e9;
  for (const double level : {0.1, 0.3, 0.5, 0.9}) {
    const auto lines = marching_squares(field, n, n, -3, -3, step, step, level);
    ASSERT_EQ(lines.size(), 1u) << level;
    const auto& line = lines[0];
    ASSERT_GT(line.size(), 8u);
    EXPECT_EQ(line.front(), line.back());
    const double expected = std::sqrt(-2 * std::log(level));
    double mean_r = 0;
    for (const auto& p : line) {
      const double r = std::hypot(p.x, p.y);
      EXPECT_NEAR(r, expected, 0.05) << level;
      mean_r += r;
    }
    mean_r /= static_cast<double>(line.size());
    EXPECT_LT(mean_r, previous_radius);
    previous_radius = mean_r;
  }
}

TEST(Contour, OpenLinesEndOnBoundary) {
  // A ramp in x: every iso-line is a vertical segment from bottom to top.
  const int n = 11;
  std::vector<double> v;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) v.push_back(ix + 0.1 * iy);
  }
  const auto lines = marching_squares(v, n, n, 0, 0, 1, 1, 4.55);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_TRUE(on_boundary(lines[0].front(), 0, 10));
  EXPECT_TRUE(on_boundary(lines[0].back(), 0, 10));
  EXPECT_NE(lines[0].front(), lines[0].back());
}

TEST(Contour, EveryLineClosedOrBoundaryTerminated) {
  // Two bumps plus a ridge touching the edge.
  const int n = 50;
  std::vector<double> v;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double x = ix / 49.0, y = iy / 49.0;
      v.push_back(std::exp(-40 * ((x - .3) * (x - .3) + (y - .3) * (y - .3))) +
                  std::exp(-40 * ((x - .7) * (x - .7) + (y - .6) * (y - .6))) + 0.6 * std::exp(-30 * x * x));
    }
  }
  for (const double level : {0.2, 0.4, 0.6, 0.8}) {
    for (const auto& line : marching_squares(v, n, n, 0, 0, 1.0 / 49, 1.0 / 49, level)) {
      ASSERT_GE(line.size(), 2u);
      const bool closed = line.front() == line.back();
      EXPECT_TRUE(closed || (on_boundary(line.front(), 0, 1) && on_boundary(line.back(), 0, 1))) << level;
    }
  }
}

TEST(Contour, SaddleResolvedByCenter) {
  // Diagonal corners inside; center mean decides whether they connect.
  const std::vector<double> high = {1, 0, 0, 1};
  const std::vector<double> low = {1, 0.2, 0.2, 1};
  EXPECT_EQ(marching_squares(high, 2, 2, 0, 0, 1, 1, 0.5).size(), 2u);
  EXPECT_EQ(marching_squares(low, 2, 2, 0, 0, 1, 1, 0.5).size(), 2u);
  // Uniform field: nothing to draw.
  EXPECT_TRUE(marching_squares({1, 1, 1, 1}, 2, 2, 0, 0, 1, 1, 0.5).empty());
}

TEST(Contour, PercentileInterpolates) {
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0), 1);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 100), 4);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({10, 20}, 25), 12.5);
}

TEST(Contour, GridContoursAtPercentiles) {
  std::vector<double> vals;
  for (int iy = 0; iy < 20; ++iy) {
    for (int ix = 0; ix < 20; ++ix) vals.push_back(-((ix - 9.5) * (ix - 9.5) + (iy - 9.5) * (iy - 9.5)));
  }
  const FamiliarityGrid grid(20, {0, 20, 0, 20}, vals);
  const auto levels = grid_contours(grid);
  ASSERT_EQ(levels.size(), 5u);
  for (std::size_t i = 1; i < levels.size(); ++i) EXPECT_GT(levels[i].level, levels[i - 1].level);
  for (const auto& l : levels) {
    for (const auto& line : l.polylines) {
      for (const auto& p : line) EXPECT_TRUE(grid.bounds().contains(p));
    }
  }
  EXPECT_FALSE(levels[4].polylines.empty());
}
