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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtriage/corpus.hpp"
#include "mtriage/topics.hpp"

namespace mtriage {

enum class SetKind { kUnitTest, kTopic };
std::string_view to_string(SetKind kind);
SetKind parse_set_kind(std::string_view text);

inline constexpr std::size_t kHistogramBins = 20;
using Histogram = std::array<std::size_t, kHistogramBins>;

// Uniform bin of v over [lo, hi]; v == hi falls in the last bin. A degenerate
// range maps everything to bin 0.
std::size_t histogram_bin(double v, double lo, double hi);

struct SetMetrics {
  std::size_t log_count = 0;
  std::size_t train_count = 0;
  std::optional<double> train_ratio;  // unset when the set is empty
  std::optional<double> mean_chrf;    // over train members
  Histogram chrf_histogram{};         // over [0, 1]
  std::optional<double> mean_familiarity;  // over log members
  Histogram familiarity_histogram{};       // over the global log FA range
  double familiarity_min = 0.0;
  double familiarity_max = 0.0;
  std::map<std::string, std::size_t> source_counts;   // provenance -> count
  std::map<std::string, std::size_t> overlap_counts;  // other-kind set_id -> shared members
  std::map<std::string, std::size_t> timeline;        // UTC day -> log count

  friend bool operator==(const SetMetrics&, const SetMetrics&) = default;
};

struct ChallengeSet {
  std::string set_id;
  std::string name;
  SetKind kind = SetKind::kUnitTest;
  std::vector<std::string> member_ids;
  std::set<std::string> removed_ids;
  std::uint64_t version = 0;
  std::vector<Keyword> keywords;
  SetMetrics metrics;

  bool is_active(const std::string& id) const { return !removed_ids.contains(id); }
  std::vector<std::string> active_members() const;

  friend bool operator==(const ChallengeSet&, const ChallengeSet&) = default;
};

// One "mismatch-<rule>" set per rule with at least one failure, in rule-name order.
std::vector<ChallengeSet> build_unit_test_sets(const Corpus& corpus);

struct ExpansionConfig {
  std::size_t seeds_per_topic = 15;
  double radius = 0.6;
  std::uint64_t rng_seed = 0;
};

// Seed ids sampled for a topic (all members when fewer than seeds_per_topic).
std::vector<std::string> sample_seeds(const Topic& topic, const ExpansionConfig& config);
// Each topic becomes a set: its log members plus every train record within
// radius of one of its seeds.
std::vector<ChallengeSet> expand_topic_sets(const std::vector<Topic>& topics, const Corpus& corpus,
                                            const ExpansionConfig& config);

// Keywords for unit-test sets, with the unit-test sets as the c-TF-IDF classes.
void attach_set_keywords(std::vector<ChallengeSet>& sets, const Corpus& corpus, const std::set<std::string>& stopwords,
                         std::size_t keyword_count);

struct MetricsContext {
  double familiarity_min = 0.0;
  double familiarity_max = 0.0;
};
MetricsContext metrics_context(const Corpus& corpus);

SetMetrics compute_metrics(const ChallengeSet& set, const Corpus& corpus, const std::vector<ChallengeSet>& all_sets,
                           const MetricsContext& context);
SetMetrics compute_metrics(const ChallengeSet& set, const Corpus& corpus, const std::vector<ChallengeSet>& all_sets);
// Recomputes metrics of every set.
void refresh_metrics(std::vector<ChallengeSet>& sets, const Corpus& corpus);

struct SetEdit {
  enum class Op { kRemove, kRestore, kRename };
  Op op = Op::kRemove;
  std::vector<std::string> ids;
  std::string name;
};
std::string_view to_string(SetEdit::Op op);
SetEdit::Op parse_edit_op(std::string_view text);

// Applies the edit (throws InputError on a non-member, a member already in the
// requested state, or an empty name), bumps the version and recomputes metrics.
ChallengeSet edit_set(ChallengeSet set, const SetEdit& edit, const Corpus& corpus,
                      const std::vector<ChallengeSet>& all_sets);

// Conjunctive filter over set members. Each field is unset or empty when inactive.
// chrf bounds constrain train rows only; time and familiarity bounds constrain
// log rows only.
struct SentenceFilter {
  std::optional<Timestamp> time_from;
  std::optional<Timestamp> time_to;
  std::vector<std::string> keywords;
  bool keywords_all = false;  // AND across keywords instead of OR
  std::optional<double> chrf_min, chrf_max;
  std::optional<double> fa_min, fa_max;
  std::set<std::string> provenance;
  std::string text;  // case-insensitive substring of source, translation or reference
  std::string overlap_set;

  bool empty() const;
};

// Active members passing the filter, in member order.
std::vector<const SentenceRecord*> filter_members(const ChallengeSet& set, const Corpus& corpus,
                                                  const SentenceFilter& filter, const std::vector<ChallengeSet>& all_sets);

// Export rows: the full record plus "set". Returns the rows as JSONL text.
std::string export_jsonl(const ChallengeSet& set, const Corpus& corpus, const SentenceFilter& filter,
                         const std::vector<ChallengeSet>& all_sets, std::size_t* row_count = nullptr);
std::size_t export_set(const ChallengeSet& set, const Corpus& corpus, const SentenceFilter& filter,
                       const std::vector<ChallengeSet>& all_sets, const std::filesystem::path& path);
// Reads an exported file back into records (the "set" field is dropped).
std::vector<SentenceRecord> read_export(const std::filesystem::path& path);

// Up to `limit` active members, seeded; returned in member order.
std::vector<std::string> preview_members(const ChallengeSet& set, std::uint64_t seed, std::size_t limit = 100);

nlohmann::ordered_json metrics_to_json(const SetMetrics& metrics);
SetMetrics metrics_from_json(const nlohmann::json& j);
nlohmann::ordered_json set_to_json(const ChallengeSet& set);
ChallengeSet set_from_json(const nlohmann::json& j);

}  // namespace mtriage
