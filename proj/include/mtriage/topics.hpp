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
#include <utility>
#include <vector>

#include "mtriage/corpus.hpp"

namespace mtriage {

struct TopicConfig {
  std::size_t sample_size = 50000;
  std::size_t top_k_topics = 100;
  std::size_t min_cluster_size = 25;
  // Projection units; unset means auto (see default_cluster_radius).
  std::optional<double> cluster_radius;
  std::uint64_t rng_seed = 0;
  // Empty path: bundled English list.
  std::filesystem::path stopword_list;
  std::size_t keyword_count = 10;
  // Keywords scoring below this are dropped (0 keeps all).
  double keyword_min_score = 0.0;

  void validate() const;
};

struct Keyword {
  std::string term;
  double score = 0.0;
  friend bool operator==(const Keyword&, const Keyword&) = default;
};

struct Topic {
  int topic_id = 0;
  std::vector<std::string> member_ids;  // log record ids, ascending
  std::vector<Keyword> keywords;        // descending score
  friend bool operator==(const Topic&, const Topic&) = default;
};

// The min(sample_size, n_log) lowest-familiarity log ids; ties by id ascending.
std::vector<std::string> select_unfamiliar(const Corpus& corpus, const TopicConfig& config);

// Twice the median distance to the (min_cluster_size - 1)-th nearest neighbour.
double default_cluster_radius(const std::vector<Point2>& points, std::size_t min_cluster_size);

// Density clustering of the ids' 2D projections: points with at least
// min_cluster_size points (themselves included) within cluster_radius are
// cores; clusters are the core-connected components plus reachable border
// points. Clusters smaller than min_cluster_size are discarded; the rest are
// sorted by size (ties: smallest member id) and truncated to top_k_topics.
std::vector<Topic> cluster(const std::vector<std::string>& ids, const Corpus& corpus, const TopicConfig& config);

// Parity hook: topics from an external assignment (id -> topic label) file,
// JSONL {"id","topic"}; negative labels are noise.
std::vector<Topic> topics_from_assignments(const std::filesystem::path& path, const Corpus& corpus,
                                           const TopicConfig& config);

std::set<std::string> load_stopwords(const std::filesystem::path& path);
const std::set<std::string>& default_stopwords();

// Class-based TF-IDF: W(t, c) = tf(t, c) * log(1 + A / f(t)), where A is the
// average token count per class and f(t) the total count of t over classes.
// Each inner vector is one class's documents.
std::vector<std::vector<Keyword>> ctfidf(const std::vector<std::vector<std::string>>& class_documents,
                                         const std::set<std::string>& stopwords, std::size_t keyword_count,
                                         double min_score = 0.0);

// Keywords from the members' source text.
void ctfidf_keywords(std::vector<Topic>& topics, const Corpus& corpus, const TopicConfig& config);

std::string name_topic(const Topic& topic);

// Sets topic_id on member log records (clearing stale assignments).
void assign_topics(Corpus& corpus, const std::vector<Topic>& topics);

}  // namespace mtriage
