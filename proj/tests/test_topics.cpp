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
#include <random>

#include "mtriage/random.hpp"
#include "mtriage/topics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mtriage;
using testing_support::log_record;

namespace {

// Log records with the given projections and familiarity; ids are zero-padded.
Corpus log_corpus(const std::vector<Point2>& pts, const std::vector<std::string>& texts = {}) {
  std::vector<SentenceRecord> recs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "l%04zu", i);
    auto r = log_record(id, texts.empty() ? "text" : texts[i], "t", "2024-01-01T00:00:00Z");
    r.projection = pts[i];
    r.familiarity = -static_cast<double>(i);
    recs.push_back(std::move(r));
  }
  return Corpus({"en", "es"}, recs);
}

std::vector<std::string> ids_of(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& r : c.records()) out.push_back(r.id);
  return out;
}

std::vector<Point2> blobs(const std::vector<Point2>& centers, std::size_t per, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point2> pts;
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per; ++i) pts.push_back({c.x + sd * standard_normal(rng), c.y + sd * standard_normal(rng)});
  }
  return pts;
}

// `per` points uniform in a disk of the given radius around each center.
std::vector<Point2> disks(const std::vector<Point2>& centers, std::size_t per, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point2> pts;
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per;) {
      const double x = (2 * uniform_unit(rng) - 1) * radius, y = (2 * uniform_unit(rng) - 1) * radius;
      if (x * x + y * y > radius * radius) continue;
      pts.push_back({c.x + x, c.y + y});
      ++i;
    }
  }
  return pts;
}

}  // namespace

TEST(Ctfidf, HandComputedWeights) {
  // Five kept tokens over two classes: A = 2.5.
  const auto kw = ctfidf({{"fever fever chills"}, {"fever rent"}}, {}, 10);
  ASSERT_EQ(kw.size(), 2u);
  ASSERT_EQ(kw[0].size(), 2u);
  EXPECT_EQ(kw[0][0].term, "chills");
  EXPECT_NEAR(kw[0][0].score, std::log(3.5), 1e-15);
  EXPECT_EQ(kw[0][1].term, "fever");
  EXPECT_NEAR(kw[0][1].score, 2 * std::log(1 + 2.5 / 3), 1e-15);
  EXPECT_NEAR(kw[0][1].score, oracle::ctfidf_weight(2, 2.5, 3), 1e-15);
  EXPECT_EQ(kw[1][0].term, "rent");
  EXPECT_NEAR(kw[1][0].score, std::log(3.5), 1e-15);
}

TEST(Ctfidf, StopwordsCaseAndTies) {
  const auto kw = ctfidf({{"The Zebra and the APPLE", "zebra apple"}, {"x y banana"}}, default_stopwords(), 10);
  for (const auto& k : kw[0]) EXPECT_NE(k.term, "the");
  ASSERT_EQ(kw[0].size(), 2u);
  // Equal scores: lexicographic order.
  EXPECT_EQ(kw[0][0].term, "apple");
  EXPECT_EQ(kw[0][1].term, "zebra");
  // Single-letter Latin tokens are dropped.
  EXPECT_EQ(kw[1].size(), 1u);
}

TEST(Ctfidf, CountAndThreshold) {
  const auto kw = ctfidf({{"aa bb bb cc cc cc"}, {"dd"}}, {}, 2);
  EXPECT_EQ(kw[0].size(), 2u);
  EXPECT_EQ(kw[0][0].term, "cc");
  const auto cut = ctfidf({{"aa bb bb cc cc cc"}, {"dd"}}, {}, 10, 2.0);
  for (const auto& k : cut[0]) EXPECT_GE(k.score, 2.0);
  EXPECT_LT(cut[0].size(), 3u);
}

TEST(Topics, NameFromTopKeywords) {
  Topic t;
  t.keywords = {{"haha", 9}, {"lol", 8}, {"so", 7}, {"you", 6}, {"extra", 5}};
  EXPECT_EQ(name_topic(t), "topic-haha_lol_so_you");
  t.keywords.resize(2);
  EXPECT_EQ(name_topic(t), "topic-haha_lol");
  t.keywords.clear();
  t.topic_id = 4;
  EXPECT_EQ(name_topic(t), "topic-unnamed-4");
}

TEST(Topics, SelectUnfamiliarLowestFirstWithTies) {
  Corpus c = log_corpus({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  auto& recs = c.mutable_records();
  recs[0].familiarity = -5;
  recs[1].familiarity = -9;
  recs[2].familiarity = -5;
  recs[3].familiarity = 1;
  TopicConfig cfg;
  cfg.sample_size = 3;
  EXPECT_EQ(select_unfamiliar(c, cfg), (std::vector<std::string>{"l0001", "l0000", "l0002"}));
  cfg.sample_size = 100;
  EXPECT_EQ(select_unfamiliar(c, cfg).size(), 4u);
}

TEST(Topics, TwoBlobsGiveTwoTopics) {
  // Uniform disks: no tail points for the density rule to reject.
  const auto pts = disks({{0, 0}, {20, 0}}, 100, 2.0, 1);
  const Corpus c = log_corpus(pts);
  TopicConfig cfg;
  cfg.min_cluster_size = 10;
  const auto topics = cluster(ids_of(c), c, cfg);
  ASSERT_EQ(topics.size(), 2u);
  for (const auto& t : topics) {
    // Each topic stays within one blob.
    const bool first = t.member_ids.front() < "l0100";
    for (const auto& id : t.member_ids) EXPECT_EQ(id < "l0100", first);
    EXPECT_EQ(t.member_ids.size(), 100u);
  }
}

TEST(Topics, GaussianBlobsKeepAlmostAllPoints) {
  const Corpus c = log_corpus(blobs({{0, 0}, {20, 0}}, 100, 1.0, 1));
  TopicConfig cfg;
  cfg.min_cluster_size = 10;
  const auto topics = cluster(ids_of(c), c, cfg);
  ASSERT_EQ(topics.size(), 2u);
  for (const auto& t : topics) EXPECT_GE(t.member_ids.size(), 95u);
  EXPECT_EQ(topics[0].topic_id, 0);
  EXPECT_GE(topics[0].member_ids.size(), topics[1].member_ids.size());
}

TEST(Topics, SmallClustersDroppedAndTopKApplied) {
  auto pts = blobs({{0, 0}, {30, 0}, {60, 0}}, 60, 0.5, 2);
  const auto tiny = blobs({{100, 100}}, 5, 0.1, 3);
  pts.insert(pts.end(), tiny.begin(), tiny.end());
  const Corpus c = log_corpus(pts);
  TopicConfig cfg;
  cfg.min_cluster_size = 10;
  cfg.cluster_radius = 1.0;
  EXPECT_EQ(cluster(ids_of(c), c, cfg).size(), 3u);
  cfg.top_k_topics = 2;
  EXPECT_EQ(cluster(ids_of(c), c, cfg).size(), 2u);
}

TEST(Topics, ClusteringIsOrderIndependent) {
  const auto pts = blobs({{0, 0}, {10, 10}}, 50, 1.0, 4);
  const Corpus c = log_corpus(pts);
  auto ids = ids_of(c);
  TopicConfig cfg;
  cfg.min_cluster_size = 8;
  const auto a = cluster(ids, c, cfg);
  std::reverse(ids.begin(), ids.end());
  EXPECT_EQ(cluster(ids, c, cfg), a);
}

TEST(Topics, DefaultRadiusFromNeighborDistances) {
  // Unit lattice: every interior point's 4th neighbour is at distance 1.
  std::vector<Point2> grid;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) grid.push_back({static_cast<double>(i), static_cast<double>(j)});
  }
  EXPECT_DOUBLE_EQ(default_cluster_radius(grid, 5), 2.0);
}

TEST(Topics, KeywordsAndAssignment) {
  std::vector<std::string> texts;
  auto pts = blobs({{0, 0}, {20, 0}}, 30, 0.5, 5);
  for (std::size_t i = 0; i < pts.size(); ++i) texts.push_back(i < 30 ? "the volcano erupted" : "my guitar string");
  Corpus c = log_corpus(pts, texts);
  TopicConfig cfg;
  cfg.min_cluster_size = 5;
  auto topics = cluster(ids_of(c), c, cfg);
  ASSERT_EQ(topics.size(), 2u);
  ctfidf_keywords(topics, c, cfg);
  for (const auto& t : topics) {
    ASSERT_FALSE(t.keywords.empty());
    const std::string expected = t.member_ids.front() < "l0030" ? "erupted" : "guitar";
    EXPECT_EQ(t.keywords[0].term, expected);
  }
  assign_topics(c, topics);
  EXPECT_EQ(c.at(topics[1].member_ids[0]).topic_id, topics[1].topic_id);
}

TEST(Topics, ExternalAssignments) {
  const Corpus c = log_corpus(blobs({{0, 0}}, 6, 1.0, 6));
  testing_support::TempDir dir("assign");
  testing_support::write_file(dir / "a.jsonl",
                              "{\"id\":\"l0000\",\"topic\":1}\n{\"id\":\"l0001\",\"topic\":1}\n"
                              "{\"id\":\"l0002\",\"topic\":0}\n{\"id\":\"l0003\",\"topic\":-1}\n"
                              "{\"id\":\"l0004\",\"topic\":1}\n");
  TopicConfig cfg;
  cfg.min_cluster_size = 2;
  const auto topics = topics_from_assignments(dir / "a.jsonl", c, cfg);
  ASSERT_EQ(topics.size(), 1u);
  EXPECT_EQ(topics[0].member_ids, (std::vector<std::string>{"l0000", "l0001", "l0004"}));
  testing_support::write_file(dir / "b.jsonl", "{\"id\":\"l0000\"}\n");
  EXPECT_THROW(topics_from_assignments(dir / "b.jsonl", c, cfg), InputError);
}

TEST(Topics, StopwordFile) {
  testing_support::TempDir dir("stop");
  testing_support::write_file(dir / "s.txt", "# list\nFoo\n  bar \n\n");
  EXPECT_EQ(load_stopwords(dir / "s.txt"), (std::set<std::string>{"foo", "bar"}));
  EXPECT_TRUE(load_stopwords({}).contains("the"));
}
