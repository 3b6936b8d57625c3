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
#include <string>
#include <vector>

#include "json.hpp"
#include "mtriage/chrf.hpp"
#include "mtriage/corpus.hpp"
#include "mtriage/familiarity.hpp"
#include "mtriage/geometry.hpp"
#include "mtriage/rules.hpp"
#include "mtriage/sets.hpp"
#include "mtriage/store.hpp"
#include "mtriage/topics.hpp"

namespace mtriage {

struct PipelineConfig {
  std::filesystem::path train_file;
  std::filesystem::path log_file;
  std::filesystem::path embedding_file;
  // Precomputed 2D coordinates (JSONL {"id","x","y"}); empty selects the linear fallback.
  std::filesystem::path coords_file;
  // Directory with <lang>/ovs.txt and <pair>/punct.map overrides; empty uses the bundled packs.
  std::filesystem::path rule_pack_dir;
  // External topic labels (JSONL {"id","topic"}) instead of the built-in clustering.
  std::filesystem::path topic_assignments;
  std::filesystem::path store_dir;

  LanguagePair language_pair{"en", "es"};
  bool normalize_embeddings = true;
  bool emoji_multiset = false;
  std::uint64_t rng_seed = 0;
  std::size_t preview_size = 100;

  ChrfConfig chrf;
  KdeConfig kde;
  TopicConfig topics;
  ExpansionConfig expansion;

  void validate() const;
};

// Stage seeds, all derived from rng_seed.
std::uint64_t projection_seed(const PipelineConfig& config);
std::uint64_t topic_seed(const PipelineConfig& config);
std::uint64_t expansion_seed(const PipelineConfig& config);
std::uint64_t preview_seed(const PipelineConfig& config);

// Relative paths in the file resolve against `base`. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
PipelineConfig load_config(const std::filesystem::path& path);
// The snapshot leaves out store_dir, so a store does not depend on where it lives.
nlohmann::ordered_json config_to_json(const PipelineConfig& config);

// Everything a run produces, held in memory between stages.
struct PipelineState {
  PipelineConfig config;
  Corpus corpus;
  std::optional<ProjectionModel> projection;
  std::optional<FamiliarityGrid> train_grid;
  std::optional<FamiliarityGrid> log_grid;
  std::optional<std::vector<Topic>> topics;
  std::optional<std::vector<ChallengeSet>> sets;
};

// Individual stages. Each throws InputError or StageError; the message names the stage.
void stage_ingest(PipelineState& state);
void stage_project(PipelineState& state);
void stage_familiarity(PipelineState& state);
void stage_rules(PipelineState& state);
void stage_chrf(PipelineState& state);
void stage_topics(PipelineState& state);
void stage_build_sets(PipelineState& state);

// Persists whatever the state holds (sets last, so the manifest covers the rest).
void save_state(const PipelineState& state, const ArtifactStore& store);
// Reads back a (possibly partial) store; the config comes from its snapshot.
PipelineState load_state(const ArtifactStore& store);

// Runs every stage, writing into a sibling temp directory that replaces
// store_dir on success and is removed on failure. Holds <store_dir>.lock.
PipelineState run_pipeline(const PipelineConfig& config);

struct SetSummaryRow {
  std::string set_id;
  std::string name;
  std::size_t log_count = 0;
  std::size_t train_count = 0;
  std::optional<double> mean_chrf;
  std::optional<double> mean_familiarity;
  std::optional<double> train_ratio;
};
std::vector<SetSummaryRow> summarize(const std::vector<ChallengeSet>& sets);
std::string format_summary_table(const std::vector<SetSummaryRow>& rows);
nlohmann::ordered_json summary_json(const PipelineState& state);

}  // namespace mtriage
