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
#include "mtriage/corpus.hpp"
#include "mtriage/familiarity.hpp"
#include "mtriage/geometry.hpp"
#include "mtriage/sets.hpp"
#include "mtriage/topics.hpp"

namespace mtriage {

struct JournalEntry {
  std::string set_id;
  SetEdit edit;
  std::uint64_t version = 0;  // set version after the edit
  std::string timestamp;      // RFC 3339
};

// On-disk artifact directory:
//   config.json        config snapshot (required)
//   corpus.jsonl       records with every computed field
//   embeddings.aemb    binary embeddings in corpus order
//   projection.json    projection model
//   familiarity.afgr   train familiarity grid
//   log_density.afgr   log density grid (contours)
//   topics.json        extracted topics
//   sets/<id>.json     one file per challenge set
//   manifest.json      set list with content hashes, artifact hashes
//   edits.jsonl        append-only edit journal
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file(std::string_view name) const { return root_ / name; }
  bool exists(std::string_view name) const;

  void create_directories() const;

  void save_config(const nlohmann::ordered_json& config) const;
  nlohmann::json load_config() const;

  void save_corpus(const Corpus& corpus) const;
  // Corpus with embeddings attached when embeddings.aemb is present.
  Corpus load_corpus() const;

  void save_projection(const ProjectionModel& model) const;
  ProjectionModel load_projection() const;

  void save_grid(std::string_view name, const FamiliarityGrid& grid) const;
  std::optional<FamiliarityGrid> load_grid(std::string_view name) const;

  void save_topics(const std::vector<Topic>& topics) const;
  std::vector<Topic> load_topics() const;

  // Writes sets/ and manifest.json (replacing previous sets) and an empty journal.
  void save_sets(const std::vector<ChallengeSet>& sets) const;
  // Verifies every set file against its manifest hash.
  std::vector<ChallengeSet> load_sets() const;

  void append_journal(const JournalEntry& entry) const;
  std::vector<JournalEntry> read_journal() const;

  // Throws InputError naming what is missing or corrupt.
  void validate_complete() const;

 private:
  std::filesystem::path root_;
};

nlohmann::ordered_json journal_to_json(const JournalEntry& entry);
JournalEntry journal_from_json(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Exclusive lock file (O_EXCL create); removed on destruction.
class LockFile {
 public:
  explicit LockFile(std::filesystem::path path);
  ~LockFile();
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace mtriage
