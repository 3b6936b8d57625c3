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

#include <set>

#include "mtriage/demo.hpp"
#include "mtriage/pipeline.hpp"
#include "mtriage/store.hpp"
#include "test_support.hpp"

using namespace mtriage;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

DemoOptions small_demo() {
  DemoOptions o;
  o.n_train = 800;
  o.n_log = 800;
  o.unfamiliar_topics = 4;
  o.dim = 16;
  o.seed = 3;
  return o;
}

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

std::string config_error(std::string_view text) {
  try {
    config_from_json(nlohmann::json::parse(text), "/base");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAndResolvesRelativePaths) {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({
    "train_file": "data/train.jsonl", "log_file": "/abs/log.jsonl", "embedding_file": "e.aemb",
    "language_pair": "en-zh", "rng_seed": 9,
    "kde": {"grid_density": 50, "acceleration": "tree"},
    "topics": {"min_cluster_size": 7, "cluster_radius": 0.5},
    "expansion": {"radius": 0.4}
  })"),
                                    "/base");
  EXPECT_EQ(cfg.train_file, std::filesystem::path("/base/data/train.jsonl"));
  EXPECT_EQ(cfg.log_file, std::filesystem::path("/abs/log.jsonl"));
  EXPECT_EQ(cfg.language_pair.target, "zh");
  EXPECT_EQ(cfg.kde.grid_density, 50);
  EXPECT_EQ(cfg.kde.acceleration, KdeAcceleration::kTree);
  EXPECT_EQ(cfg.topics.min_cluster_size, 7u);
  EXPECT_EQ(*cfg.topics.cluster_radius, 0.5);
  EXPECT_EQ(cfg.expansion.radius, 0.4);
  EXPECT_EQ(cfg.expansion.seeds_per_topic, 15u);
  // Snapshot round trip.
  auto again = config_from_json(config_to_json(cfg), "/elsewhere");
  again.store_dir = cfg.store_dir;
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_NE(config_error(R"({"train_fle": "x"})").find("train_fle"), std::string::npos);
  EXPECT_NE(config_error(R"({"kde": {"bandwidth": 2}})").find("bandwidth"), std::string::npos);
  EXPECT_FALSE(config_error(R"({"rng_seed": "seven"})").empty());
  EXPECT_FALSE(config_error(R"({"kde": {"acceleration": "fast"}})").empty());
  EXPECT_FALSE(config_error(R"([1, 2])").empty());
}

TEST(Config, StageSeedsDiffer) {
  PipelineConfig c;
  c.rng_seed = 5;
  const std::set<std::uint64_t> seeds = {projection_seed(c), topic_seed(c), expansion_seed(c), preview_seed(c)};
  EXPECT_EQ(seeds.size(), 4u);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    files_ = write_demo(dir_.path(), small_demo());
    config_ = load_config(files_.config_file);
  }
  PipelineConfig config_at(std::string_view name) {
    auto c = config_;
    c.store_dir = dir_ / name;
    return c;
  }

  TempDir dir_{"pipe"};
  DemoFiles files_;
  PipelineConfig config_;
};

TEST_F(PipelineTest, RunsAndIsDeterministic) {
  const auto a = run_pipeline(config_at("a"));
  run_pipeline(config_at("b"));
  ASSERT_TRUE(a.sets);
  EXPECT_FALSE(a.sets->empty());
  const auto manifest_a = read_file(dir_ / "a" / "manifest.json");
  EXPECT_EQ(manifest_a, read_file(dir_ / "b" / "manifest.json"));
  EXPECT_EQ(tree_contents(dir_ / "a"), tree_contents(dir_ / "b"));
  ArtifactStore store(dir_ / "a");
  EXPECT_NO_THROW(store.validate_complete());
  EXPECT_EQ(store.load_sets(), *a.sets);
}

TEST_F(PipelineTest, DifferentSeedChangesOutput) {
  run_pipeline(config_at("a"));
  auto other = config_at("b");
  other.rng_seed += 1;
  run_pipeline(other);
  EXPECT_NE(read_file(dir_ / "a" / "manifest.json"), read_file(dir_ / "b" / "manifest.json"));
}

TEST_F(PipelineTest, StageCompositionMatchesFullRun) {
  run_pipeline(config_at("full"));
  const ArtifactStore store(dir_ / "staged");
  std::filesystem::create_directories(store.root());
  {
    PipelineState s;
    s.config = config_at("staged");
    stage_ingest(s);
    save_state(s, store);
  }
  for (auto* stage : {&stage_project, &stage_familiarity, &stage_rules, &stage_chrf, &stage_topics, &stage_build_sets}) {
    PipelineState s = load_state(store);
    stage(s);
    save_state(s, store);
  }
  EXPECT_EQ(tree_contents(dir_ / "full"), tree_contents(dir_ / "staged"));
}

TEST_F(PipelineTest, StageOrderIsEnforced) {
  PipelineState s;
  s.config = config_at("x");
  stage_ingest(s);
  try {
    stage_topics(s);
    FAIL() << "expected an error";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("topics"), std::string::npos);
  }
}

TEST_F(PipelineTest, LockBlocksConcurrentRun) {
  const auto cfg = config_at("locked");
  LockFile lock(cfg.store_dir.string() + ".lock");
  EXPECT_THROW(run_pipeline(cfg), InputError);
  EXPECT_FALSE(std::filesystem::exists(cfg.store_dir));
}

TEST_F(PipelineTest, FailedRunLeavesPreviousStoreAndNoTempDirs) {
  const auto cfg = config_at("store");
  run_pipeline(cfg);
  const auto before = tree_contents(cfg.store_dir);
  auto broken = cfg;
  write_file(dir_ / "short.jsonl", "{\"id\":\"nobody\",\"x\":0,\"y\":0}\n");
  broken.coords_file = dir_ / "short.jsonl";
  EXPECT_THROW(run_pipeline(broken), InputError);
  EXPECT_EQ(tree_contents(cfg.store_dir), before);
  for (const auto& e : std::filesystem::directory_iterator(dir_.path())) {
    const auto name = e.path().filename().string();
    EXPECT_EQ(name.find(".tmp-"), std::string::npos) << name;
    EXPECT_EQ(name.find(".old-"), std::string::npos) << name;
    EXPECT_EQ(name.find(".lock"), std::string::npos) << name;
  }
}

TEST_F(PipelineTest, TamperedSetFileIsDetected) {
  const auto cfg = config_at("store");
  const auto state = run_pipeline(cfg);
  const auto& first = state.sets->front();
  write_file(cfg.store_dir / "sets" / (first.set_id + ".json"), "{}\n");
  EXPECT_THROW(ArtifactStore(cfg.store_dir).load_sets(), InputError);
}

TEST_F(PipelineTest, SummaryMentionsEverySet) {
  const auto state = run_pipeline(config_at("store"));
  const auto table = format_summary_table(summarize(*state.sets));
  for (const auto& s : *state.sets) EXPECT_NE(table.find(s.set_id), std::string::npos);
  const auto j = summary_json(state);
  EXPECT_EQ(j["sets"].size(), state.sets->size());
  EXPECT_EQ(j["n_train"], state.corpus.n_train());
}

TEST(Store, JournalRoundTripIgnoresTornTail) {
  TempDir dir("journal");
  const ArtifactStore store(dir.path());
  store.create_directories();
  store.save_sets({});
  JournalEntry a{"tp-000", {SetEdit::Op::kRemove, {"x", "y"}, ""}, 1, "2024-01-01T00:00:00Z"};
  JournalEntry b{"tp-000", {SetEdit::Op::kRename, {}, "new name"}, 2, "2024-01-01T00:00:01Z"};
  store.append_journal(a);
  store.append_journal(b);
  {
    std::ofstream out(store.file("edits.jsonl"), std::ios::app);
    out << "{\"set_id\":\"tp-0";
  }
  const auto back = store.read_journal();
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].edit.ids, a.edit.ids);
  EXPECT_EQ(back[1].edit.name, "new name");
  EXPECT_EQ(back[1].version, 2u);
}

TEST(Store, IncompleteStoreIsReported) {
  TempDir dir("incomplete");
  const ArtifactStore store(dir.path());
  EXPECT_THROW(store.validate_complete(), InputError);
  EXPECT_THROW(store.load_config(), InputError);
}
