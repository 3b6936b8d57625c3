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

#include <algorithm>
#include <cmath>
#include <random>

#include "mtriage/geometry.hpp"
#include "mtriage/kdtree2d.hpp"
#include "mtriage/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mtriage;
using testing_support::train_record;

namespace {

std::vector<Point2> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({uniform_unit(rng) * 10, uniform_unit(rng) * 10});
  return pts;
}

Corpus train_corpus(const std::vector<std::vector<float>>& vectors) {
  std::vector<SentenceRecord> recs;
  for (std::size_t i = 0; i < vectors.size(); ++i) recs.push_back(train_record("t" + std::to_string(i), "s", "t", "r"));
  Corpus c({"en", "es"}, recs);
  testing_support::attach_vectors(c, vectors);
  return c;
}

}  // namespace

TEST(KdTree, WithinMatchesBruteForce) {
  const auto pts = random_points(1500, 1);
  const KdTree2 tree(pts, 8);
  std::mt19937_64 rng(2);
  for (int q = 0; q < 100; ++q) {
    const Point2 c{uniform_unit(rng) * 12 - 1, uniform_unit(rng) * 12 - 1};
    const double r = 0.1 + uniform_unit(rng) * 2;
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::hypot(pts[i].x - c.x, pts[i].y - c.y) <= r) expect.push_back(i);
    }
    EXPECT_EQ(tree.within(c, r), expect);
  }
}

TEST(KdTree, KthNeighborMatchesBruteForce) {
  const auto pts = random_points(400, 3);
  const KdTree2 tree(pts, 4);
  for (std::size_t self = 0; self < pts.size(); self += 13) {
    std::vector<double> d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != self) d.push_back(std::hypot(pts[i].x - pts[self].x, pts[i].y - pts[self].y));
    }
    std::sort(d.begin(), d.end());
    for (const std::size_t k : {1u, 5u, 24u}) EXPECT_NEAR(tree.kth_neighbor_distance(self, k), d[k - 1], 1e-12);
  }
  EXPECT_TRUE(std::isinf(KdTree2(std::vector<Point2>{{0, 0}, {1, 1}}).kth_neighbor_distance(0, 2)));
}

TEST(KdTree, NodeBoxDistances) {
  const KdTree2::Node n{0, 1, 0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(min_dist2(n, {0.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(min_dist2(n, {3, 1}), 4.0);
  EXPECT_DOUBLE_EQ(max_dist2(n, {0, 0}), 2.0);
}

TEST(Bounds, DegenerateThrows) {
  EXPECT_THROW(bounding_box({}), StageError);
  EXPECT_THROW(bounding_box({{1, 1}, {1, 2}}), StageError);
  EXPECT_EQ(bounding_box({{0, 3}, {2, -1}}), (Bounds{0, 2, -1, 3}));
}

TEST(Projection, FallbackIsUnitVarianceAndDeterministic) {
  std::mt19937_64 rng(4);
  std::vector<std::vector<float>> vecs;
  for (int i = 0; i < 200; ++i) {
    std::vector<float> v(16);
    for (int k = 0; k < 16; ++k) v[k] = static_cast<float>(standard_normal(rng) * (k == 3 ? 5.0 : k == 7 ? 2.0 : 0.3));
    vecs.push_back(v);
  }
  Corpus a = train_corpus(vecs);
  Corpus b = train_corpus(vecs);
  const auto ma = fallback_project(a, 11);
  fallback_project(b, 11);
  EXPECT_EQ(a.records(), b.records());
  EXPECT_EQ(ma.kind, ProjectionKind::kLinearFallback);
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (const auto& r : a.records()) {
    sx += r.projection->x;
    sy += r.projection->y;
    sxx += r.projection->x * r.projection->x;
    syy += r.projection->y * r.projection->y;
  }
  const double n = 200;
  EXPECT_NEAR(sx / n, 0, 1e-9);
  EXPECT_NEAR(sy / n, 0, 1e-9);
  EXPECT_NEAR((sxx - sx * sx / n) / (n - 1), 1.0, 1e-9);
  EXPECT_NEAR((syy - sy * sy / n) / (n - 1), 1.0, 1e-9);
  // The dominant axes are the high-variance embedding components.
  const std::size_t dim = 16;
  EXPECT_GT(std::abs(ma.basis[3]), 0.99);
  EXPECT_GT(std::abs(ma.basis[dim + 7]), 0.99);
}

TEST(Projection, TwoDimensionalEmbeddingsKeepAxes) {
  Corpus c = train_corpus({{0, 0}, {2, 0}, {0, 4}, {2, 4}});
  const auto m = fallback_project(c, 0);
  EXPECT_EQ(m.basis, (std::vector<double>{1, 0, 0, 1}));
  EXPECT_GT(c.records()[1].projection->x, c.records()[0].projection->x);
  EXPECT_GT(c.records()[2].projection->y, c.records()[0].projection->y);
}

TEST(Projection, SeparatesTwoBlobs) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<float>> vecs;
  for (int i = 0; i < 300; ++i) {
    std::vector<float> v(16);
    for (int k = 0; k < 16; ++k) v[k] = static_cast<float>(0.1 * standard_normal(rng) + (i < 150 ? 1.0 : -1.0) * (k % 2));
    vecs.push_back(v);
  }
  Corpus c = train_corpus(vecs);
  fallback_project(c, 1);
  double max_a = -1e9, min_b = 1e9, min_a = 1e9, max_b = -1e9;
  for (int i = 0; i < 300; ++i) {
    const double x = c.records()[i].projection->x;
    if (i < 150) {
      max_a = std::max(max_a, x);
      min_a = std::min(min_a, x);
    } else {
      max_b = std::max(max_b, x);
      min_b = std::min(min_b, x);
    }
  }
  EXPECT_TRUE(max_a < min_b || max_b < min_a);
}

TEST(Projection, ImportCoversEveryRecord) {
  testing_support::TempDir dir("coords");
  Corpus c({"en", "es"}, {train_record("a", "s", "t", "r"), train_record("b", "s", "t", "r")});
  testing_support::write_file(dir / "c.jsonl", "{\"id\":\"a\",\"x\":1,\"y\":2}\n{\"id\":\"b\",\"x\":3,\"y\":-2}\n");
  const auto m = import_projection(c, dir / "c.jsonl");
  EXPECT_EQ(m.bounds, (Bounds{1, 3, -2, 2}));
  write_coordinates(c, dir / "out.jsonl");
  Corpus d({"en", "es"}, {train_record("a", "s", "t", "r"), train_record("b", "s", "t", "r")});
  import_projection(d, dir / "out.jsonl");
  EXPECT_EQ(c.records(), d.records());

  testing_support::write_file(dir / "short.jsonl", "{\"id\":\"a\",\"x\":1,\"y\":2}\n");
  EXPECT_THROW(import_projection(d, dir / "short.jsonl"), InputError);
  testing_support::write_file(dir / "bad.jsonl", "{\"id\":\"a\",\"x\":\"1\",\"y\":2}\n");
  EXPECT_THROW(import_projection(d, dir / "bad.jsonl"), InputError);
}

TEST(Neighbors, MatchesAllPairsOracleWithStrictRadius) {
  std::mt19937_64 rng(6);
  std::vector<std::vector<float>> vecs;
  for (int i = 0; i < 500; ++i) {
    std::vector<float> v(8);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng) * 0.5);
    vecs.push_back(v);
  }
  // A point exactly at distance 1 from the seed must be excluded.
  vecs[1] = vecs[0];
  vecs[1][0] += 1.0f;
  const double exact = std::abs(static_cast<double>(vecs[1][0]) - vecs[0][0]);
  Corpus c = train_corpus(vecs);
  const std::vector<std::string> seeds = {"t0", "t7", "t42"};
  for (const double r : {0.3, 0.8, exact, 1.5}) {
    const auto got = neighbors_within(c, seeds, r);
    std::vector<std::string> want;
    for (const auto i : oracle::all_pairs_within(vecs, {vecs[0], vecs[7], vecs[42]}, r)) want.push_back("t" + std::to_string(i));
    EXPECT_EQ(got, want) << r;
  }
  EXPECT_THROW(neighbors_within(c, seeds, 0.0), InputError);
}
