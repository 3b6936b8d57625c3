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

#include <numeric>
#include <random>

#include "mtriage/random.hpp"
#include "mtriage/sets.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mtriage;
using testing_support::log_record;
using testing_support::train_record;

namespace {

// Mixed corpus with computed fields filled in at random.
Corpus random_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> provs = {"news", "app", "web"};
  std::vector<SentenceRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const bool train = rng() % 2 == 0;
    const std::string id = (train ? "t" : "l") + std::to_string(i);
    auto r = train ? train_record(id, "cats and dogs " + std::to_string(i % 7), "gatos", "gatos")
                   : log_record(id, "rain on tuesday " + std::to_string(i % 5), "lluvia",
                                testing_support::day_timestamp(static_cast<int>(rng() % 10)));
    r.provenance = provs[rng() % provs.size()];
    if (train) r.chrf = uniform_unit(rng);
    else r.familiarity = -30.0 * uniform_unit(rng);
    recs.push_back(std::move(r));
  }
  return Corpus({"en", "es"}, recs);
}

ChallengeSet random_set(const Corpus& c, std::mt19937_64& rng, std::string id, SetKind kind) {
  ChallengeSet s;
  s.set_id = std::move(id);
  s.name = s.set_id;
  s.kind = kind;
  for (const auto& r : c.records()) {
    if (rng() % 3 == 0) s.member_ids.push_back(r.id);
  }
  for (const auto& m : s.member_ids) {
    if (rng() % 5 == 0) s.removed_ids.insert(m);
  }
  return s;
}

}  // namespace

TEST(Sets, HistogramBins) {
  EXPECT_EQ(histogram_bin(0.0, 0, 1), 0u);
  EXPECT_EQ(histogram_bin(1.0, 0, 1), kHistogramBins - 1);
  EXPECT_EQ(histogram_bin(0.05, 0, 1), 1u);
  EXPECT_EQ(histogram_bin(0.049, 0, 1), 0u);
  EXPECT_EQ(histogram_bin(-3, 0, 1), 0u);
  EXPECT_EQ(histogram_bin(5, 2, 2), 0u);
}

TEST(Sets, MetricsPropertiesOnRandomSets) {
  int cases = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Corpus c = random_corpus(60 + seed, seed);
    std::mt19937_64 rng(seed * 7 + 1);
    std::vector<ChallengeSet> sets;
    for (int k = 0; k < 22; ++k) {
      sets.push_back(random_set(c, rng, "s" + std::to_string(k), k % 2 ? SetKind::kTopic : SetKind::kUnitTest));
    }
    refresh_metrics(sets, c);
    const auto ctx = metrics_context(c);
    for (const auto& s : sets) {
      ++cases;
      const auto& m = s.metrics;
      std::size_t n_train = 0, n_log = 0;
      double chrf_sum = 0, fa_sum = 0;
      for (const auto& id : s.active_members()) {
        const auto& r = c.at(id);
        if (r.is_train()) {
          ++n_train;
          chrf_sum += *r.chrf;
        } else {
          ++n_log;
          fa_sum += *r.familiarity;
        }
      }
      ASSERT_EQ(m.train_count, n_train);
      ASSERT_EQ(m.log_count, n_log);
      if (n_train + n_log == 0) {
        EXPECT_FALSE(m.train_ratio);
      } else {
        EXPECT_DOUBLE_EQ(*m.train_ratio, static_cast<double>(n_train) / (n_train + n_log));
      }
      if (n_train) {
        EXPECT_NEAR(*m.mean_chrf, chrf_sum / n_train, 1e-12);
        EXPECT_GE(*m.mean_chrf, 0.0);
        EXPECT_LE(*m.mean_chrf, 1.0);
      } else {
        EXPECT_FALSE(m.mean_chrf);
      }
      if (n_log) {
        EXPECT_NEAR(*m.mean_familiarity, fa_sum / n_log, 1e-12);
        EXPECT_GE(*m.mean_familiarity, ctx.familiarity_min);
        EXPECT_LE(*m.mean_familiarity, ctx.familiarity_max);
      }
      EXPECT_EQ(std::accumulate(m.chrf_histogram.begin(), m.chrf_histogram.end(), std::size_t{0}), n_train);
      EXPECT_EQ(std::accumulate(m.familiarity_histogram.begin(), m.familiarity_histogram.end(), std::size_t{0}), n_log);
      std::size_t prov = 0, days = 0;
      for (const auto& [k, v] : m.source_counts) prov += v;
      for (const auto& [k, v] : m.timeline) days += v;
      EXPECT_EQ(prov, n_train + n_log);
      EXPECT_EQ(days, n_log);
      // Overlap is symmetric and only across kinds.
      for (const auto& [other_id, shared] : m.overlap_counts) {
        const auto& other = *std::find_if(sets.begin(), sets.end(), [&](const auto& o) { return o.set_id == other_id; });
        EXPECT_NE(other.kind, s.kind);
        EXPECT_EQ(other.metrics.overlap_counts.at(s.set_id), shared);
      }
    }
  }
  EXPECT_GE(cases, 1000);
}

TEST(Sets, UnitTestSetsPerRule) {
  auto a = train_record("a", "x", "y", "y");
  a.failed_rules = {"comma", "emoji"};
  auto b = log_record("b", "x", "y", "2024-01-01T00:00:00Z");
  b.failed_rules = {"comma"};
  const Corpus c({"en", "es"}, {a, b, train_record("c", "x", "y", "y")});
  const auto sets = build_unit_test_sets(c);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].set_id, "ut-comma");
  EXPECT_EQ(sets[0].name, "mismatch-comma");
  EXPECT_EQ(sets[0].member_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(sets[1].name, "mismatch-emoji");
}

TEST(Sets, ExpansionMatchesOracleAndGrowsWithRadius) {
  std::mt19937_64 rng(3);
  std::vector<SentenceRecord> recs;
  std::vector<std::vector<float>> vecs;
  for (int i = 0; i < 400; ++i) {
    recs.push_back(train_record("t" + std::to_string(i), "s", "t", "r"));
    std::vector<float> v(6);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng) * 0.6);
    vecs.push_back(v);
  }
  Topic topic;
  for (int i = 0; i < 40; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "l%02d", i);
    recs.push_back(log_record(id, "s", "t", "2024-01-01T00:00:00Z"));
    topic.member_ids.push_back(id);
    std::vector<float> v(6);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng) * 0.6);
    vecs.push_back(v);
  }
  topic.topic_id = 3;
  topic.keywords = {{"alpha", 2}, {"beta", 1}};
  Corpus c({"en", "es"}, recs);
  testing_support::attach_vectors(c, vecs);

  ExpansionConfig cfg;
  cfg.rng_seed = 17;
  const auto seeds = sample_seeds(topic, cfg);
  ASSERT_EQ(seeds.size(), 15u);
  EXPECT_EQ(seeds, sample_seeds(topic, cfg));

  std::size_t previous = 0;
  for (const double r : {0.3, 0.6, 0.9, 1.2}) {
    cfg.radius = r;
    const auto sets = expand_topic_sets({topic}, c, cfg);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets[0].set_id, "tp-003");
    EXPECT_EQ(sets[0].name, "topic-alpha_beta");
    std::vector<std::vector<float>> seed_vecs;
    for (const auto& id : seeds) seed_vecs.push_back(vecs[*c.index_of(id)]);
    std::vector<std::vector<float>> train_vecs(vecs.begin(), vecs.begin() + 400);
    std::vector<std::string> want = topic.member_ids;
    for (const auto i : oracle::all_pairs_within(train_vecs, seed_vecs, r)) want.push_back("t" + std::to_string(i));
    EXPECT_EQ(sets[0].member_ids, want);
    EXPECT_GE(sets[0].member_ids.size(), previous);
    previous = sets[0].member_ids.size();
  }
  EXPECT_GT(previous, 40u);
}

TEST(Sets, EditsBumpVersionAndValidate) {
  const Corpus c = random_corpus(30, 1);
  ChallengeSet s;
  s.set_id = "tp-000";
  s.name = "topic-x";
  s.kind = SetKind::kTopic;
  for (std::size_t i = 0; i < 10; ++i) s.member_ids.push_back(c.records()[i].id);
  const std::vector<ChallengeSet> all = {s};

  auto removed = edit_set(s, {SetEdit::Op::kRemove, {s.member_ids[0], s.member_ids[3]}, ""}, c, all);
  EXPECT_EQ(removed.version, 1u);
  EXPECT_EQ(removed.active_members().size(), 8u);
  EXPECT_EQ(removed.metrics.log_count + removed.metrics.train_count, 8u);
  EXPECT_THROW(edit_set(removed, {SetEdit::Op::kRemove, {s.member_ids[0]}, ""}, c, all), InputError);
  EXPECT_THROW(edit_set(removed, {SetEdit::Op::kRestore, {s.member_ids[1]}, ""}, c, all), InputError);
  EXPECT_THROW(edit_set(removed, {SetEdit::Op::kRemove, {"nope"}, ""}, c, all), InputError);
  EXPECT_THROW(edit_set(removed, {SetEdit::Op::kRename, {}, "  "}, c, all), InputError);

  const auto restored = edit_set(removed, {SetEdit::Op::kRestore, {s.member_ids[0]}, ""}, c, all);
  EXPECT_EQ(restored.version, 2u);
  EXPECT_EQ(restored.active_members().size(), 9u);
  const auto renamed = edit_set(restored, {SetEdit::Op::kRename, {}, "volcanoes"}, c, all);
  EXPECT_EQ(renamed.name, "volcanoes");
  EXPECT_EQ(renamed.version, 3u);
  EXPECT_EQ(parse_edit_op("restore"), SetEdit::Op::kRestore);
  EXPECT_THROW(parse_edit_op("delete"), InputError);
}

TEST(Sets, FiltersAreConjunctive) {
  auto t1 = train_record("t1", "The red car", "El coche rojo", "El auto rojo", "news");
  t1.chrf = 0.2;
  auto t2 = train_record("t2", "A blue car", "Un coche azul", "Un coche azul", "web");
  t2.chrf = 0.9;
  auto l1 = log_record("l1", "Red sky at night", "Cielo rojo", "2024-01-05T00:00:00Z", "app");
  l1.familiarity = -20;
  auto l2 = log_record("l2", "Blue sky", "Cielo azul", "2024-02-05T00:00:00Z", "app");
  l2.familiarity = -2;
  const Corpus c({"en", "es"}, {t1, t2, l1, l2});
  ChallengeSet s;
  s.set_id = "ut-x";
  s.member_ids = {"t1", "t2", "l1", "l2"};
  ChallengeSet other;
  other.set_id = "tp-000";
  other.kind = SetKind::kTopic;
  other.member_ids = {"t2", "l2"};
  const std::vector<ChallengeSet> all = {s, other};

  auto ids = [&](const SentenceFilter& f) {
    std::vector<std::string> out;
    for (const auto* r : filter_members(s, c, f, all)) out.push_back(r->id);
    return out;
  };
  using V = std::vector<std::string>;
  EXPECT_EQ(ids({}), (V{"t1", "t2", "l1", "l2"}));
  SentenceFilter f;
  f.keywords = {"RED"};
  EXPECT_EQ(ids(f), (V{"t1", "l1"}));
  f.keywords = {"red", "sky"};
  EXPECT_EQ(ids(f), (V{"t1", "l1", "l2"}));
  f.keywords_all = true;
  EXPECT_EQ(ids(f), (V{"l1"}));
  f = {};
  f.chrf_min = 0.5;
  EXPECT_EQ(ids(f), (V{"t2", "l1", "l2"}));  // chrF bounds leave logs alone
  f = {};
  f.time_from = parse_rfc3339("2024-02-01T00:00:00Z");
  EXPECT_EQ(ids(f), (V{"t1", "t2", "l2"}));  // time bounds leave train rows alone
  f = {};
  f.fa_max = -10;
  EXPECT_EQ(ids(f), (V{"t1", "t2", "l1"}));
  f = {};
  f.provenance = {"app", "web"};
  EXPECT_EQ(ids(f), (V{"t2", "l1", "l2"}));
  f = {};
  f.text = "AUTO";
  EXPECT_EQ(ids(f), (V{"t1"}));  // reference text is searched
  f = {};
  f.overlap_set = "tp-000";
  EXPECT_EQ(ids(f), (V{"t2", "l2"}));
  f.provenance = {"web"};
  EXPECT_EQ(ids(f), (V{"t2"}));
  f.overlap_set = "tp-999";
  EXPECT_THROW(ids(f), InputError);
}

TEST(Sets, ExportRoundTrip) {
  testing_support::TempDir dir("export");
  Corpus c = random_corpus(40, 2);
  ChallengeSet s;
  s.set_id = "ut-comma";
  s.name = "mismatch-comma";
  for (const auto& r : c.records()) s.member_ids.push_back(r.id);
  s.removed_ids = {s.member_ids[0]};
  SentenceFilter f;
  f.provenance = {"news"};
  const auto rows = export_set(s, c, f, {s}, dir / "out.jsonl");
  const auto back = read_export(dir / "out.jsonl");
  ASSERT_EQ(back.size(), rows);
  const auto expected = filter_members(s, c, f, {s});
  ASSERT_EQ(expected.size(), rows);
  for (std::size_t i = 0; i < rows; ++i) EXPECT_EQ(back[i], *expected[i]);
  const auto text = testing_support::read_file(dir / "out.jsonl");
  EXPECT_NE(text.find("\"set\":\"mismatch-comma\""), std::string::npos);
}

TEST(Sets, PreviewIsStableBoundedAndActive) {
  ChallengeSet s;
  s.set_id = "tp-001";
  for (int i = 0; i < 500; ++i) s.member_ids.push_back("m" + std::to_string(1000 + i));
  s.removed_ids = {"m1000", "m1001"};
  const auto a = preview_members(s, 42, 100);
  EXPECT_EQ(a.size(), 100u);
  EXPECT_EQ(a, preview_members(s, 42, 100));
  EXPECT_NE(a, preview_members(s, 43, 100));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  for (const auto& id : a) EXPECT_TRUE(s.is_active(id));
  s.member_ids.resize(30);
  EXPECT_EQ(preview_members(s, 42, 100).size(), 28u);
}

TEST(Sets, JsonRoundTrip) {
  const Corpus c = random_corpus(50, 5);
  std::mt19937_64 rng(1);
  std::vector<ChallengeSet> sets = {random_set(c, rng, "ut-a", SetKind::kUnitTest),
                                    random_set(c, rng, "tp-000", SetKind::kTopic)};
  sets[1].keywords = {{"rain", 1.5}};
  sets[1].version = 4;
  refresh_metrics(sets, c);
  for (const auto& s : sets) EXPECT_EQ(set_from_json(nlohmann::json::parse(set_to_json(s).dump())), s);
}
