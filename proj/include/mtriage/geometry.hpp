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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mtriage/corpus.hpp"

namespace mtriage {

struct Bounds {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Point2 p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

// Bounding box of the points; throws StageError unless max > min on both axes.
Bounds bounding_box(const std::vector<Point2>& points);

enum class ProjectionKind { kImported, kLinearFallback };

struct ProjectionModel {
  ProjectionKind kind = ProjectionKind::kImported;
  // Fallback only: 2 x D basis (row-major), centering mean and per-axis scale.
  std::vector<double> basis;
  std::vector<double> mean;
  double scale_x = 1.0, scale_y = 1.0;
  Bounds bounds;  // over train projections only
};

// Coordinates file: JSONL {"id","x","y"}. Every record must be covered.
ProjectionModel import_projection(Corpus& corpus, const std::filesystem::path& coords_file);
void write_coordinates(const Corpus& corpus, const std::filesystem::path& coords_file);

// Projection onto the top two principal directions of the train embeddings,
// scaled to unit variance per axis over train records. Two-dimensional
// embeddings keep their own axes. Deterministic for a given seed.
ProjectionModel fallback_project(Corpus& corpus, std::uint64_t seed);

// Train points' projections, in corpus order.
std::vector<Point2> train_projections(const Corpus& corpus);

// Exact: train records whose minimum Euclidean embedding distance to any seed
// is strictly below radius. Returned in corpus order.
std::vector<std::string> neighbors_within(const Corpus& corpus, const std::vector<std::string>& seed_ids,
                                          double radius);

}  // namespace mtriage
