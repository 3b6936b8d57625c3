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

#include "mtriage/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

namespace mtriage {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError(where + ": unknown key \"" + key + "\"");
    }
  }
}

std::filesystem::path resolve(const json& j, const char* key, const std::filesystem::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  std::filesystem::path p = j.at(key).get<std::string>();
  if (p.empty()) return {};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string path_string(const std::filesystem::path& p) { return p.string(); }

template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    throw InputError(std::string(name) + ": " + e.what());
  } catch (const StageError& e) {
    throw StageError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(name) + ": " + e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InputError(std::string(what) + " not available; run the earlier stages first");
}

std::vector<Point2> log_projections(const Corpus& corpus) {
  std::vector<Point2> out;
  for (const auto& r : corpus.records()) {
    if (r.is_log() && r.projection) out.push_back(*r.projection);
  }
  return out;
}

Bounds merge(const Bounds& a, const Bounds& b) {
  return {std::min(a.min_x, b.min_x), std::max(a.max_x, b.max_x), std::min(a.min_y, b.min_y),
          std::max(a.max_y, b.max_y)};
}

std::string format_optional(const std::optional<double>& v, const char* fmt) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (train_file.empty()) throw InputError("config: train_file is required");
  if (log_file.empty()) throw InputError("config: log_file is required");
  if (embedding_file.empty()) throw InputError("config: embedding_file is required");
  if (store_dir.empty()) throw InputError("config: store_dir is required");
  if (preview_size == 0) throw InputError("config: preview_size must be positive");
  if (expansion.seeds_per_topic == 0) throw InputError("config: expansion.seeds_per_topic must be positive");
  if (!(expansion.radius > 0.0)) throw InputError("config: expansion.radius must be positive");
  chrf.validate();
  kde.validate();
  topics.validate();
}

std::uint64_t projection_seed(const PipelineConfig& c) { return derive_seed(c.rng_seed, "projection"); }
std::uint64_t topic_seed(const PipelineConfig& c) { return derive_seed(c.rng_seed, "topics"); }
std::uint64_t expansion_seed(const PipelineConfig& c) { return derive_seed(c.rng_seed, "expansion"); }
std::uint64_t preview_seed(const PipelineConfig& c) { return derive_seed(c.rng_seed, "preview"); }

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base) {
  PipelineConfig c;
  try {
    check_keys(j,
               {"train_file", "log_file", "embedding_file", "coords_file", "rule_pack_dir", "topic_assignments",
                "store_dir", "language_pair", "normalize_embeddings", "emoji_multiset", "rng_seed", "preview_size",
                "chrf", "kde", "topics", "expansion"},
               "config");
    c.train_file = resolve(j, "train_file", base);
    c.log_file = resolve(j, "log_file", base);
    c.embedding_file = resolve(j, "embedding_file", base);
    c.coords_file = resolve(j, "coords_file", base);
    c.rule_pack_dir = resolve(j, "rule_pack_dir", base);
    c.topic_assignments = resolve(j, "topic_assignments", base);
    c.store_dir = resolve(j, "store_dir", base);
    if (j.contains("language_pair")) c.language_pair = parse_language_pair(j.at("language_pair").get<std::string>());
    c.normalize_embeddings = j.value("normalize_embeddings", c.normalize_embeddings);
    c.emoji_multiset = j.value("emoji_multiset", c.emoji_multiset);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.preview_size = j.value("preview_size", c.preview_size);

    if (j.contains("chrf")) {
      const auto& s = j.at("chrf");
      check_keys(s, {"max_order", "beta", "remove_whitespace"}, "config.chrf");
      c.chrf.max_order = s.value("max_order", c.chrf.max_order);
      c.chrf.beta = s.value("beta", c.chrf.beta);
      c.chrf.remove_whitespace = s.value("remove_whitespace", c.chrf.remove_whitespace);
    }
    if (j.contains("kde")) {
      const auto& s = j.at("kde");
      check_keys(s, {"grid_density", "acceleration", "relative_tolerance"}, "config.kde");
      c.kde.grid_density = s.value("grid_density", c.kde.grid_density);
      const auto accel = s.value("acceleration", std::string("exact"));
      if (accel == "exact") {
        c.kde.acceleration = KdeAcceleration::kExactSum;
      } else if (accel == "tree") {
        c.kde.acceleration = KdeAcceleration::kTree;
      } else {
        throw InputError("config.kde: acceleration must be \"exact\" or \"tree\"");
      }
      c.kde.relative_tolerance = s.value("relative_tolerance", c.kde.relative_tolerance);
    }
    if (j.contains("topics")) {
      const auto& s = j.at("topics");
      check_keys(s,
                 {"sample_size", "top_k_topics", "min_cluster_size", "cluster_radius", "stopword_list",
                  "keyword_count", "keyword_min_score"},
                 "config.topics");
      c.topics.sample_size = s.value("sample_size", c.topics.sample_size);
      c.topics.top_k_topics = s.value("top_k_topics", c.topics.top_k_topics);
      c.topics.min_cluster_size = s.value("min_cluster_size", c.topics.min_cluster_size);
      if (s.contains("cluster_radius") && !s.at("cluster_radius").is_null()) {
        c.topics.cluster_radius = s.at("cluster_radius").get<double>();
      }
      c.topics.stopword_list = resolve(s, "stopword_list", base);
      c.topics.keyword_count = s.value("keyword_count", c.topics.keyword_count);
      c.topics.keyword_min_score = s.value("keyword_min_score", c.topics.keyword_min_score);
    }
    if (j.contains("expansion")) {
      const auto& s = j.at("expansion");
      check_keys(s, {"seeds_per_topic", "radius"}, "config.expansion");
      c.expansion.seeds_per_topic = s.value("seeds_per_topic", c.expansion.seeds_per_topic);
      c.expansion.radius = s.value("radius", c.expansion.radius);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError(path.string() + ": malformed JSON");
  return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["train_file"] = path_string(c.train_file);
  j["log_file"] = path_string(c.log_file);
  j["embedding_file"] = path_string(c.embedding_file);
  j["coords_file"] = path_string(c.coords_file);
  j["rule_pack_dir"] = path_string(c.rule_pack_dir);
  j["topic_assignments"] = path_string(c.topic_assignments);
  j["language_pair"] = c.language_pair.code();
  j["normalize_embeddings"] = c.normalize_embeddings;
  j["emoji_multiset"] = c.emoji_multiset;
  j["rng_seed"] = c.rng_seed;
  j["preview_size"] = c.preview_size;
  j["chrf"] = {{"max_order", c.chrf.max_order}, {"beta", c.chrf.beta}, {"remove_whitespace", c.chrf.remove_whitespace}};
  j["kde"] = {{"grid_density", c.kde.grid_density},
              {"acceleration", c.kde.acceleration == KdeAcceleration::kTree ? "tree" : "exact"},
              {"relative_tolerance", c.kde.relative_tolerance}};
  ordered_json t;
  t["sample_size"] = c.topics.sample_size;
  t["top_k_topics"] = c.topics.top_k_topics;
  t["min_cluster_size"] = c.topics.min_cluster_size;
  t["cluster_radius"] = c.topics.cluster_radius ? ordered_json(*c.topics.cluster_radius) : ordered_json(nullptr);
  t["stopword_list"] = path_string(c.topics.stopword_list);
  t["keyword_count"] = c.topics.keyword_count;
  t["keyword_min_score"] = c.topics.keyword_min_score;
  j["topics"] = std::move(t);
  j["expansion"] = {{"seeds_per_topic", c.expansion.seeds_per_topic}, {"radius", c.expansion.radius}};
  return j;
}

void stage_ingest(PipelineState& s) {
  run_stage("ingest", [&] {
    s.corpus = ingest(s.config.train_file, s.config.log_file, s.config.language_pair);
    attach_embeddings(s.corpus, s.config.embedding_file, s.config.normalize_embeddings);
    s.projection.reset();
    s.train_grid.reset();
    s.log_grid.reset();
    s.topics.reset();
    s.sets.reset();
  });
}

void stage_project(PipelineState& s) {
  run_stage("project", [&] {
    require(s.corpus.size() > 0, "corpus");
    s.projection = s.config.coords_file.empty() ? fallback_project(s.corpus, projection_seed(s.config))
                                                : import_projection(s.corpus, s.config.coords_file);
  });
}

void stage_familiarity(PipelineState& s) {
  run_stage("familiarity", [&] {
    require(s.projection.has_value(), "projection");
    const KdeModel model = fit_kde(train_projections(s.corpus));
    s.train_grid = build_grid(model, s.projection->bounds, s.config.kde);
    score_logs(s.corpus, *s.train_grid);

    // Log density for the contour overlay, on the union of both extents.
    s.log_grid.reset();
    const auto logs = log_projections(s.corpus);
    if (logs.size() >= 2) {
      try {
        const Bounds bounds = merge(s.projection->bounds, bounding_box(logs));
        s.log_grid = build_grid(fit_kde(logs), bounds, s.config.kde);
      } catch (const StageError& e) {
        std::cerr << "warning: no log density grid: " << e.what() << '\n';
      }
    }
  });
}

void stage_rules(PipelineState& s) {
  run_stage("rules", [&] {
    require(s.corpus.size() > 0, "corpus");
    const RuleOptions options{s.config.emoji_multiset};
    const auto rules =
        s.config.rule_pack_dir.empty()
            ? builtin_rules(s.corpus.language_pair(), options)
            : rules_for_pack(std::make_shared<const LanguagePack>(
                                 load_rule_pack(s.config.rule_pack_dir, s.corpus.language_pair())),
                             options);
    run_rules(s.corpus, rules);
  });
}

void stage_chrf(PipelineState& s) {
  run_stage("chrf", [&] {
    require(s.corpus.size() > 0, "corpus");
    score_training(s.corpus, s.config.chrf);
  });
}

void stage_topics(PipelineState& s) {
  run_stage("topics", [&] {
    require(s.train_grid.has_value(), "familiarity grid");
    TopicConfig tc = s.config.topics;
    tc.rng_seed = topic_seed(s.config);
    std::vector<Topic> topics = s.config.topic_assignments.empty()
                                    ? cluster(select_unfamiliar(s.corpus, tc), s.corpus, tc)
                                    : topics_from_assignments(s.config.topic_assignments, s.corpus, tc);
    ctfidf_keywords(topics, s.corpus, tc);
    assign_topics(s.corpus, topics);
    s.topics = std::move(topics);
  });
}

void stage_build_sets(PipelineState& s) {
  run_stage("build-sets", [&] {
    require(s.topics.has_value(), "topics");
    auto sets = build_unit_test_sets(s.corpus);
    const auto& tc = s.config.topics;
    const auto stopwords = tc.stopword_list.empty() ? default_stopwords() : load_stopwords(tc.stopword_list);
    attach_set_keywords(sets, s.corpus, stopwords, tc.keyword_count);
    ExpansionConfig ec = s.config.expansion;
    ec.rng_seed = expansion_seed(s.config);
    for (auto& t : expand_topic_sets(*s.topics, s.corpus, ec)) sets.push_back(std::move(t));
    refresh_metrics(sets, s.corpus);
    s.sets = std::move(sets);
  });
}

void save_state(const PipelineState& s, const ArtifactStore& store) {
  run_stage("persist", [&] {
    store.create_directories();
    store.save_config(config_to_json(s.config));
    if (s.corpus.size() > 0) store.save_corpus(s.corpus);
    if (s.projection) store.save_projection(*s.projection);
    if (s.train_grid) store.save_grid("familiarity.afgr", *s.train_grid);
    if (s.log_grid) store.save_grid("log_density.afgr", *s.log_grid);
    if (s.topics) store.save_topics(*s.topics);
    if (s.sets) store.save_sets(*s.sets);
  });
}

PipelineState load_state(const ArtifactStore& store) {
  PipelineState s;
  s.config = config_from_json(store.load_config());
  s.config.store_dir = store.root();
  if (store.exists("corpus.jsonl")) s.corpus = store.load_corpus();
  if (store.exists("projection.json")) s.projection = store.load_projection();
  s.train_grid = store.load_grid("familiarity.afgr");
  s.log_grid = store.load_grid("log_density.afgr");
  if (store.exists("topics.json")) s.topics = store.load_topics();
  if (store.exists("manifest.json")) s.sets = store.load_sets();
  return s;
}

PipelineState run_pipeline(const PipelineConfig& config) {
  config.validate();
  const std::filesystem::path target = config.store_dir.lexically_normal();
  const std::filesystem::path target_name = target.has_filename() ? target : target.parent_path();
  if (!target_name.parent_path().empty()) std::filesystem::create_directories(target_name.parent_path());
  LockFile lock(target_name.string() + ".lock");

  const std::string suffix = std::to_string(::getpid());
  const std::filesystem::path temp = target_name.string() + ".tmp-" + suffix;
  std::filesystem::remove_all(temp);
  PipelineState state;
  state.config = config;
  try {
    stage_ingest(state);
    stage_project(state);
    stage_familiarity(state);
    stage_rules(state);
    stage_chrf(state);
    stage_topics(state);
    stage_build_sets(state);
    save_state(state, ArtifactStore(temp));
    const std::filesystem::path old = target_name.string() + ".old-" + suffix;
    const bool replace = std::filesystem::exists(target_name);
    if (replace) std::filesystem::rename(target_name, old);
    std::filesystem::rename(temp, target_name);
    if (replace) std::filesystem::remove_all(old);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove_all(temp, ec);
    throw;
  }
  return state;
}

std::vector<SetSummaryRow> summarize(const std::vector<ChallengeSet>& sets) {
  std::vector<SetSummaryRow> rows;
  for (const auto& s : sets) {
    rows.push_back({s.set_id, s.name, s.metrics.log_count, s.metrics.train_count, s.metrics.mean_chrf,
                    s.metrics.mean_familiarity, s.metrics.train_ratio});
  }
  return rows;
}

std::string format_summary_table(const std::vector<SetSummaryRow>& rows) {
  std::size_t name_width = 4;
  for (const auto& r : rows) name_width = std::max(name_width, r.name.size());
  name_width = std::min<std::size_t>(name_width, 48);
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-*s %7s %7s %7s %9s %7s\n", "set", static_cast<int>(name_width), "name",
                "logs", "train", "chrF", "FA", "ratio");
  out << line;
  for (const auto& r : rows) {
    const std::string name = r.name.size() > name_width ? r.name.substr(0, name_width) : r.name;
    std::snprintf(line, sizeof line, "%-16s %-*s %7zu %7zu %7s %9s %7s\n", r.set_id.c_str(),
                  static_cast<int>(name_width), name.c_str(), r.log_count, r.train_count,
                  format_optional(r.mean_chrf, "%.3f").c_str(), format_optional(r.mean_familiarity, "%.2f").c_str(),
                  format_optional(r.train_ratio, "%.3f").c_str());
    out << line;
  }
  return out.str();
}

ordered_json summary_json(const PipelineState& s) {
  ordered_json j;
  j["store_dir"] = path_string(s.config.store_dir);
  j["language_pair"] = s.corpus.language_pair().code();
  j["n_train"] = s.corpus.n_train();
  j["n_log"] = s.corpus.n_log();
  j["dropped_empty"] = s.corpus.dropped_empty();
  std::size_t unit = 0, topic = 0;
  ordered_json rows = ordered_json::array();
  if (s.sets) {
    for (const auto& set : *s.sets) (set.kind == SetKind::kUnitTest ? unit : topic) += 1;
    for (const auto& r : summarize(*s.sets)) {
      auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
      rows.push_back({{"set_id", r.set_id},
                      {"name", r.name},
                      {"log_count", r.log_count},
                      {"train_count", r.train_count},
                      {"mean_chrf", opt(r.mean_chrf)},
                      {"mean_familiarity", opt(r.mean_familiarity)},
                      {"train_ratio", opt(r.train_ratio)}});
    }
  }
  j["unit_test_sets"] = unit;
  j["topic_sets"] = topic;
  j["sets"] = std::move(rows);
  return j;
}

}  // namespace mtriage
