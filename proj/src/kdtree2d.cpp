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

#include "mtriage/kdtree2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace mtriage {

double min_dist2(const KdTree2::Node& n, Point2 p) {
  const double dx = p.x < n.min_x ? n.min_x - p.x : (p.x > n.max_x ? p.x - n.max_x : 0.0);
  const double dy = p.y < n.min_y ? n.min_y - p.y : (p.y > n.max_y ? p.y - n.max_y : 0.0);
  return dx * dx + dy * dy;
}

double max_dist2(const KdTree2::Node& n, Point2 p) {
  const double dx = std::max(std::abs(p.x - n.min_x), std::abs(p.x - n.max_x));
  const double dy = std::max(std::abs(p.y - n.min_y), std::abs(p.y - n.max_y));
  return dx * dx + dy * dy;
}

KdTree2::KdTree2(std::span<const Point2> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
    build(0, points_.size(), 0);
  }
}

int KdTree2::build(std::size_t begin, std::size_t end, int depth) {
  Node node{};
  node.min_x = node.min_y = std::numeric_limits<double>::infinity();
  node.max_x = node.max_y = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) {
    const Point2& p = points_[order_[i]];
    node.min_x = std::min(node.min_x, p.x);
    node.max_x = std::max(node.max_x, p.x);
    node.min_y = std::min(node.min_y, p.y);
    node.max_y = std::max(node.max_y, p.y);
  }
  node.begin = begin;
  node.end = end;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size_) return id;

  const bool split_x = (node.max_x - node.min_x) >= (node.max_y - node.min_y);
  const std::size_t mid = begin + (end - begin) / 2;
  // Ties ordered by index so the layout does not depend on nth_element internals.
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     const double va = split_x ? points_[a].x : points_[a].y;
                     const double vb = split_x ? points_[b].x : points_[b].y;
                     return va < vb || (va == vb && a < b);
                   });
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::size_t> KdTree2::within(Point2 q, double radius) const {
  std::vector<std::size_t> out;
  if (nodes_.empty()) return out;
  const double r2 = radius * radius;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (min_dist2(n, q) > r2) continue;
    if (n.leaf()) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Point2& p = points_[order_[i]];
        const double dx = p.x - q.x, dy = p.y - q.y;
        if (dx * dx + dy * dy <= r2) out.push_back(order_[i]);
      }
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double KdTree2::kth_neighbor_distance(std::size_t self, std::size_t k) const {
  if (k == 0) return 0.0;
  const Point2 q = points_[self];
  std::priority_queue<double> best;  // max-heap of the k smallest squared distances
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (best.size() == k && min_dist2(n, q) > best.top()) continue;
    if (n.leaf()) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        if (order_[i] == self) continue;
        const Point2& p = points_[order_[i]];
        const double dx = p.x - q.x, dy = p.y - q.y;
        const double d2 = dx * dx + dy * dy;
        if (best.size() < k) best.push(d2);
        else if (d2 < best.top()) {
          best.pop();
          best.push(d2);
        }
      }
    } else {
      // Visit the nearer child first.
      const Node& l = nodes_[static_cast<std::size_t>(n.left)];
      const Node& r = nodes_[static_cast<std::size_t>(n.right)];
      if (min_dist2(l, q) <= min_dist2(r, q)) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
    }
  }
  if (best.size() < k) return std::numeric_limits<double>::infinity();
  return std::sqrt(best.top());
}

}  // namespace mtriage
