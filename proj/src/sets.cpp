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

#include "mtriage/sets.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "mtriage/geometry.hpp"
#include "mtriage/random.hpp"
#include "mtriage/record_json.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(SetKind kind) { return kind == SetKind::kUnitTest ? "unit-test" : "topic"; }

SetKind parse_set_kind(std::string_view text) {
  if (text == "unit-test") return SetKind::kUnitTest;
  if (text == "topic") return SetKind::kTopic;
  throw InputError("unknown set kind '" + std::string(text) + "'");
}

std::size_t histogram_bin(double v, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const double f = std::floor((v - lo) / (hi - lo) * static_cast<double>(kHistogramBins));
  if (!(f > 0.0)) return 0;
  return std::min(kHistogramBins - 1, static_cast<std::size_t>(f));
}

std::vector<std::string> ChallengeSet::active_members() const {
  std::vector<std::string> out;
  out.reserve(member_ids.size() - std::min(member_ids.size(), removed_ids.size()));
  for (const auto& id : member_ids) {
    if (is_active(id)) out.push_back(id);
  }
  return out;
}

std::vector<ChallengeSet> build_unit_test_sets(const Corpus& corpus) {
  std::map<std::string, std::vector<std::string>> by_rule;
  for (const auto& r : corpus.records()) {
    for (const auto& rule : r.failed_rules) by_rule[rule].push_back(r.id);
  }
  std::vector<ChallengeSet> sets;
  for (auto& [rule, members] : by_rule) {
    ChallengeSet s;
    s.set_id = "ut-" + rule;
    s.name = "mismatch-" + rule;
    s.kind = SetKind::kUnitTest;
    s.member_ids = std::move(members);
    sets.push_back(std::move(s));
  }
  return sets;
}

std::vector<std::string> sample_seeds(const Topic& topic, const ExpansionConfig& config) {
  const auto picks = sample_without_replacement(topic.member_ids.size(), config.seeds_per_topic,
                                                derive_seed(config.rng_seed, "expansion",
                                                            static_cast<std::uint64_t>(topic.topic_id)));
  std::vector<std::string> seeds;
  seeds.reserve(picks.size());
  for (const auto i : picks) seeds.push_back(topic.member_ids[i]);
  return seeds;
}

std::vector<ChallengeSet> expand_topic_sets(const std::vector<Topic>& topics, const Corpus& corpus,
                                            const ExpansionConfig& config) {
  std::vector<ChallengeSet> sets;
  sets.reserve(topics.size());
  for (const auto& topic : topics) {
    ChallengeSet s;
    char id[32];
    std::snprintf(id, sizeof id, "tp-%03d", topic.topic_id);
    s.set_id = id;
    s.name = name_topic(topic);
    s.kind = SetKind::kTopic;
    s.keywords = topic.keywords;
    s.member_ids = topic.member_ids;
    for (auto& train_id : neighbors_within(corpus, sample_seeds(topic, config), config.radius)) {
      s.member_ids.push_back(std::move(train_id));
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

void attach_set_keywords(std::vector<ChallengeSet>& sets, const Corpus& corpus, const std::set<std::string>& stopwords,
                         std::size_t keyword_count) {
  std::vector<std::vector<std::string>> docs(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const auto& id : sets[i].active_members()) docs[i].push_back(corpus.at(id).source_text);
  }
  auto keywords = ctfidf(docs, stopwords, keyword_count);
  for (std::size_t i = 0; i < sets.size(); ++i) sets[i].keywords = std::move(keywords[i]);
}

MetricsContext metrics_context(const Corpus& corpus) {
  MetricsContext ctx;
  bool any = false;
  for (const auto& r : corpus.records()) {
    if (!r.is_log() || !r.familiarity) continue;
    if (!any) {
      ctx.familiarity_min = ctx.familiarity_max = *r.familiarity;
      any = true;
    }
    ctx.familiarity_min = std::min(ctx.familiarity_min, *r.familiarity);
    ctx.familiarity_max = std::max(ctx.familiarity_max, *r.familiarity);
  }
  return ctx;
}

SetMetrics compute_metrics(const ChallengeSet& set, const Corpus& corpus, const std::vector<ChallengeSet>& all_sets,
                           const MetricsContext& ctx) {
  SetMetrics m;
  m.familiarity_min = ctx.familiarity_min;
  m.familiarity_max = ctx.familiarity_max;
  double chrf_sum = 0.0, fa_sum = 0.0;
  std::size_t chrf_n = 0, fa_n = 0;
  const auto active = set.active_members();
  for (const auto& id : active) {
    const auto& r = corpus.at(id);
    ++m.source_counts[r.provenance];
    if (r.is_train()) {
      ++m.train_count;
      if (r.chrf) {
        chrf_sum += *r.chrf;
        ++chrf_n;
        ++m.chrf_histogram[histogram_bin(*r.chrf, 0.0, 1.0)];
      }
    } else {
      ++m.log_count;
      if (r.familiarity) {
        fa_sum += *r.familiarity;
        ++fa_n;
        ++m.familiarity_histogram[histogram_bin(*r.familiarity, ctx.familiarity_min, ctx.familiarity_max)];
      }
      if (r.timestamp) ++m.timeline[utc_day(*r.timestamp)];
    }
  }
  const std::size_t total = m.train_count + m.log_count;
  if (total > 0) m.train_ratio = static_cast<double>(m.train_count) / static_cast<double>(total);
  if (chrf_n > 0) m.mean_chrf = chrf_sum / static_cast<double>(chrf_n);
  if (fa_n > 0) m.mean_familiarity = fa_sum / static_cast<double>(fa_n);

  const std::unordered_set<std::string> mine(active.begin(), active.end());
  for (const auto& other : all_sets) {
    if (other.kind == set.kind || other.set_id == set.set_id) continue;
    std::size_t shared = 0;
    for (const auto& id : other.member_ids) {
      if (other.is_active(id) && mine.contains(id)) ++shared;
    }
    if (shared > 0) m.overlap_counts[other.set_id] = shared;
  }
  return m;
}

SetMetrics compute_metrics(const ChallengeSet& set, const Corpus& corpus, const std::vector<ChallengeSet>& all_sets) {
  return compute_metrics(set, corpus, all_sets, metrics_context(corpus));
}

void refresh_metrics(std::vector<ChallengeSet>& sets, const Corpus& corpus) {
  const auto ctx = metrics_context(corpus);
  std::vector<SetMetrics> fresh;
  fresh.reserve(sets.size());
  for (const auto& s : sets) fresh.push_back(compute_metrics(s, corpus, sets, ctx));
  for (std::size_t i = 0; i < sets.size(); ++i) sets[i].metrics = std::move(fresh[i]);
}

std::string_view to_string(SetEdit::Op op) {
  switch (op) {
    case SetEdit::Op::kRemove: return "remove";
    case SetEdit::Op::kRestore: return "restore";
    case SetEdit::Op::kRename: return "rename";
  }
  return "unknown";
}

SetEdit::Op parse_edit_op(std::string_view text) {
  if (text == "remove") return SetEdit::Op::kRemove;
  if (text == "restore") return SetEdit::Op::kRestore;
  if (text == "rename") return SetEdit::Op::kRename;
  throw InputError("unknown edit op '" + std::string(text) + "'");
}

ChallengeSet edit_set(ChallengeSet set, const SetEdit& edit, const Corpus& corpus,
                      const std::vector<ChallengeSet>& all_sets) {
  switch (edit.op) {
    case SetEdit::Op::kRename: {
      const bool blank = std::all_of(edit.name.begin(), edit.name.end(),
                                     [](unsigned char c) { return std::isspace(c) != 0; });
      if (blank) throw InputError("set name must be non-empty");
      set.name = edit.name;
      break;
    }
    case SetEdit::Op::kRemove:
    case SetEdit::Op::kRestore: {
      if (edit.ids.empty()) throw InputError("edit lists no ids");
      const std::unordered_set<std::string> members(set.member_ids.begin(), set.member_ids.end());
      for (const auto& id : edit.ids) {
        if (!members.contains(id)) throw InputError("\"" + id + "\" is not a member of " + set.set_id);
        const bool removed = set.removed_ids.contains(id);
        if (edit.op == SetEdit::Op::kRemove && removed) throw InputError("\"" + id + "\" is already removed");
        if (edit.op == SetEdit::Op::kRestore && !removed) throw InputError("\"" + id + "\" is not removed");
      }
      for (const auto& id : edit.ids) {
        if (edit.op == SetEdit::Op::kRemove) set.removed_ids.insert(id);
        else set.removed_ids.erase(id);
      }
      break;
    }
  }
  ++set.version;
  set.metrics = compute_metrics(set, corpus, all_sets);
  return set;
}

bool SentenceFilter::empty() const {
  return !time_from && !time_to && keywords.empty() && !chrf_min && !chrf_max && !fa_min && !fa_max &&
         provenance.empty() && text.empty() && overlap_set.empty();
}

namespace {

bool contains_folded(const std::u32string& haystack_lower, const std::u32string& needle_lower) {
  return haystack_lower.find(needle_lower) != std::u32string::npos;
}

}  // namespace

std::vector<const SentenceRecord*> filter_members(const ChallengeSet& set, const Corpus& corpus,
                                                  const SentenceFilter& f, const std::vector<ChallengeSet>& all_sets) {
  const ChallengeSet* overlap = nullptr;
  if (!f.overlap_set.empty()) {
    for (const auto& s : all_sets) {
      if (s.set_id == f.overlap_set) overlap = &s;
    }
    if (!overlap) throw InputError("unknown overlap set \"" + f.overlap_set + "\"");
  }
  std::unordered_set<std::string> overlap_members;
  if (overlap) {
    for (auto& id : overlap->active_members()) overlap_members.insert(std::move(id));
  }
  std::vector<std::string> keywords;
  for (const auto& k : f.keywords) keywords.push_back(utf8::to_lower(k));
  const auto needle = utf8::to_lower(utf8::decode(f.text));

  std::vector<const SentenceRecord*> out;
  for (const auto& id : set.member_ids) {
    if (!set.is_active(id)) continue;
    const auto& r = corpus.at(id);
    if (r.is_log()) {
      if (f.time_from && (!r.timestamp || *r.timestamp < *f.time_from)) continue;
      if (f.time_to && (!r.timestamp || *r.timestamp > *f.time_to)) continue;
      if (f.fa_min && (!r.familiarity || *r.familiarity < *f.fa_min)) continue;
      if (f.fa_max && (!r.familiarity || *r.familiarity > *f.fa_max)) continue;
    } else {
      if (f.chrf_min && (!r.chrf || *r.chrf < *f.chrf_min)) continue;
      if (f.chrf_max && (!r.chrf || *r.chrf > *f.chrf_max)) continue;
    }
    if (!f.provenance.empty() && !f.provenance.contains(r.provenance)) continue;
    if (!keywords.empty()) {
      const auto tokens = utf8::word_tokens(r.source_text);
      const std::set<std::string> present(tokens.begin(), tokens.end());
      auto has = [&](const std::string& k) { return present.contains(k); };
      const bool ok = f.keywords_all ? std::all_of(keywords.begin(), keywords.end(), has)
                                     : std::any_of(keywords.begin(), keywords.end(), has);
      if (!ok) continue;
    }
    if (!needle.empty()) {
      const bool hit = contains_folded(utf8::to_lower(utf8::decode(r.source_text)), needle) ||
                       contains_folded(utf8::to_lower(utf8::decode(r.translation_text)), needle) ||
                       (r.reference_text && contains_folded(utf8::to_lower(utf8::decode(*r.reference_text)), needle));
      if (!hit) continue;
    }
    if (overlap && !overlap_members.contains(id)) continue;
    out.push_back(&r);
  }
  return out;
}

std::string export_jsonl(const ChallengeSet& set, const Corpus& corpus, const SentenceFilter& filter,
                         const std::vector<ChallengeSet>& all_sets, std::size_t* row_count) {
  std::ostringstream out;
  const auto rows = filter_members(set, corpus, filter, all_sets);
  for (const auto* r : rows) {
    auto j = record_to_json(*r);
    j.erase("embedding_ref");
    j["set"] = set.name;
    out << j.dump() << '\n';
  }
  if (row_count) *row_count = rows.size();
  return out.str();
}

std::size_t export_set(const ChallengeSet& set, const Corpus& corpus, const SentenceFilter& filter,
                       const std::vector<ChallengeSet>& all_sets, const std::filesystem::path& path) {
  std::size_t rows = 0;
  const auto text = export_jsonl(set, corpus, filter, all_sets, &rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write export file " + path.string());
  out << text;
  out.flush();
  if (!out) throw StageError("failed writing export file " + path.string());
  return rows;
}

std::vector<SentenceRecord> read_export(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = json::parse(line, nullptr, false);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (j.is_discarded()) throw InputError(where + ": malformed JSON");
    out.push_back(record_from_json(j, where));
  }
  return out;
}

std::vector<std::string> preview_members(const ChallengeSet& set, std::uint64_t seed, std::size_t limit) {
  const auto active = set.active_members();
  auto picks = sample_without_replacement(active.size(), limit, derive_seed(seed, "preview", fnv1a(set.set_id)));
  std::sort(picks.begin(), picks.end());
  std::vector<std::string> out;
  out.reserve(picks.size());
  for (const auto i : picks) out.push_back(active[i]);
  return out;
}

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_double(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

ordered_json metrics_to_json(const SetMetrics& m) {
  ordered_json j;
  j["log_count"] = m.log_count;
  j["train_count"] = m.train_count;
  j["train_ratio"] = optional_json(m.train_ratio);
  j["train_ratio_defined"] = m.train_ratio.has_value();
  j["mean_chrf"] = optional_json(m.mean_chrf);
  j["chrf_histogram"] = m.chrf_histogram;
  j["mean_familiarity"] = optional_json(m.mean_familiarity);
  j["familiarity_histogram"] = m.familiarity_histogram;
  j["familiarity_range"] = {m.familiarity_min, m.familiarity_max};
  j["source_counts"] = m.source_counts;
  j["overlap_counts"] = m.overlap_counts;
  j["timeline"] = m.timeline;
  return j;
}

SetMetrics metrics_from_json(const json& j) {
  SetMetrics m;
  m.log_count = j.at("log_count").get<std::size_t>();
  m.train_count = j.at("train_count").get<std::size_t>();
  m.train_ratio = optional_double(j, "train_ratio");
  m.mean_chrf = optional_double(j, "mean_chrf");
  m.chrf_histogram = j.at("chrf_histogram").get<Histogram>();
  m.mean_familiarity = optional_double(j, "mean_familiarity");
  m.familiarity_histogram = j.at("familiarity_histogram").get<Histogram>();
  m.familiarity_min = j.at("familiarity_range").at(0).get<double>();
  m.familiarity_max = j.at("familiarity_range").at(1).get<double>();
  m.source_counts = j.at("source_counts").get<std::map<std::string, std::size_t>>();
  m.overlap_counts = j.at("overlap_counts").get<std::map<std::string, std::size_t>>();
  m.timeline = j.at("timeline").get<std::map<std::string, std::size_t>>();
  return m;
}

ordered_json set_to_json(const ChallengeSet& s) {
  ordered_json j;
  j["set_id"] = s.set_id;
  j["name"] = s.name;
  j["kind"] = std::string(to_string(s.kind));
  j["version"] = s.version;
  j["member_ids"] = s.member_ids;
  j["removed_ids"] = s.removed_ids;
  auto& kws = j["keywords"] = ordered_json::array();
  for (const auto& k : s.keywords) kws.push_back({{"term", k.term}, {"score", k.score}});
  j["metrics"] = metrics_to_json(s.metrics);
  return j;
}

ChallengeSet set_from_json(const json& j) {
  ChallengeSet s;
  s.set_id = j.at("set_id").get<std::string>();
  s.name = j.at("name").get<std::string>();
  s.kind = parse_set_kind(j.at("kind").get<std::string>());
  s.version = j.value("version", std::uint64_t{0});
  s.member_ids = j.at("member_ids").get<std::vector<std::string>>();
  s.removed_ids = j.value("removed_ids", std::set<std::string>{});
  for (const auto& k : j.value("keywords", json::array())) {
    s.keywords.push_back({k.at("term").get<std::string>(), k.at("score").get<double>()});
  }
  if (j.contains("metrics")) s.metrics = metrics_from_json(j.at("metrics"));
  return s;
}

}  // namespace mtriage
