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

#pragma once

#include <vector>

#include "mtriage/familiarity.hpp"

namespace mtriage {

using Polyline = std::vector<Point2>;

struct ContourLevel {
  double percentile = 0.0;
  double level = 0.0;
  // Closed polylines repeat their first point at the end; open ones start and
  // end on the sampling boundary.
  std::vector<Polyline> polylines;
};

// Iso-lines of a scalar field sampled on a regular nx x ny lattice
// (values[iy * nx + ix] at (x0 + ix * dx, y0 + iy * dy)). Samples >= level are
// inside; saddles are resolved by the mean of the four corners.
std::vector<Polyline> marching_squares(const std::vector<double>& values, int nx, int ny, double x0, double y0,
                                       double dx, double dy, double level);

// Percentile (0..100) of the values by linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

// Contours over the grid's cell centers at the given percentiles of its values.
std::vector<ContourLevel> grid_contours(const FamiliarityGrid& grid,
                                        const std::vector<double>& percentiles = {20, 40, 60, 80, 95});

}  // namespace mtriage
