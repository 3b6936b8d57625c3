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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtriage/common.hpp"

namespace mtriage {

enum class Origin { kTrain, kLog };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view text);

struct SentenceRecord {
  std::string id;
  Origin origin = Origin::kTrain;
  std::string source_text;
  std::string translation_text;
  std::optional<std::string> reference_text;  // train only
  std::optional<Timestamp> timestamp;         // log only
  std::string provenance;
  std::optional<std::size_t> embedding_ref;
  std::optional<Point2> projection;
  std::optional<double> chrf;         // train only, [0, 1]
  std::optional<double> familiarity;  // log only, nats
  std::set<std::string> failed_rules;
  std::optional<int> topic_id;

  bool is_train() const { return origin == Origin::kTrain; }
  bool is_log() const { return origin == Origin::kLog; }

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

// Row-major float32 vectors, one row per record (SentenceRecord::embedding_ref).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dim, std::vector<float> data);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(LanguagePair pair, std::vector<SentenceRecord> records);

  const LanguagePair& language_pair() const { return language_pair_; }
  const std::vector<SentenceRecord>& records() const { return records_; }
  std::vector<SentenceRecord>& mutable_records() { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t n_train() const { return n_train_; }
  std::size_t n_log() const { return n_log_; }
  std::size_t dropped_empty() const { return dropped_empty_; }
  void set_dropped_empty(std::size_t n) { dropped_empty_ = n; }

  const SentenceRecord& at(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;

  const EmbeddingStore& embeddings() const { return embeddings_; }
  void set_embeddings(EmbeddingStore store) { embeddings_ = std::move(store); }
  std::span<const float> embedding(const SentenceRecord& record) const;

  // Checks the per-record invariants; throws InputError naming the record.
  void validate() const;

 private:
  LanguagePair language_pair_;
  std::vector<SentenceRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  EmbeddingStore embeddings_;
  std::size_t n_train_ = 0;
  std::size_t n_log_ = 0;
  std::size_t dropped_empty_ = 0;
};

// Reads the train and log JSONL files. Records with an empty source are
// dropped and counted in Corpus::dropped_empty().
Corpus ingest(const std::filesystem::path& train_file, const std::filesystem::path& log_file,
              const LanguagePair& pair);

// Embedding file: JSONL {"id","vector"} or binary "AEMB" + u32 dim + records of
// (u32 id length, id bytes, dim x f32), little-endian. Format detected by magic.
void attach_embeddings(Corpus& corpus, const std::filesystem::path& embedding_file, bool normalize = true);

struct EmbeddingEntry {
  std::string id;
  std::vector<float> vector;
};
std::vector<EmbeddingEntry> read_embedding_file(const std::filesystem::path& path);
void write_embeddings_jsonl(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries);
void write_embeddings_binary(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries);
// Writes every record's attached vector in corpus order.
void write_corpus_embeddings(const Corpus& corpus, const std::filesystem::path& path);

// Full record serialization (one JSON object per line after a header line).
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
// Embeddings are loaded separately; records keep their embedding_ref.
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace mtriage
