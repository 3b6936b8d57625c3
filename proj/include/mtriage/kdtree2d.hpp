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

#include <cstddef>
#include <span>
#include <vector>

#include "mtriage/common.hpp"

namespace mtriage {

// Static 2D k-d tree over a point set. Nodes keep their bounding boxes so the
// tree also serves bounded kernel sums (familiarity tree mode).
class KdTree2 {
 public:
  struct Node {
    double min_x, max_x, min_y, max_y;
    std::size_t begin, end;  // range into order()
    int left = -1, right = -1;
    bool leaf() const { return left < 0; }
  };

  KdTree2() = default;
  explicit KdTree2(std::span<const Point2> points, std::size_t leaf_size = 16);

  // Indices (into the constructor's points) with distance <= radius, ascending.
  std::vector<std::size_t> within(Point2 query, double radius) const;
  // Distance to the k-th nearest other point (the query point itself, if it
  // is point `self`, is skipped). Returns +inf when fewer than k others exist.
  double kth_neighbor_distance(std::size_t self, std::size_t k) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<Point2>& points() const { return points_; }

 private:
  int build(std::size_t begin, std::size_t end, int depth);

  std::vector<Point2> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 16;
};

// Squared distance from p to the node's bounding box (0 inside).
double min_dist2(const KdTree2::Node& node, Point2 p);
// Squared distance from p to the farthest corner of the node's box.
double max_dist2(const KdTree2::Node& node, Point2 p);

}  // namespace mtriage
