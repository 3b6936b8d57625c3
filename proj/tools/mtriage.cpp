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

// Command-line entry point: full pipeline, individual stages, serving and export.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mtriage/demo.hpp"
#include "mtriage/pipeline.hpp"
#include "mtriage/service.hpp"
#include "mtriage/store.hpp"

namespace {

using namespace mtriage;
namespace fs = std::filesystem;

constexpr int kInputError = 2;
constexpr int kStageError = 3;

// Flags mirroring PipelineConfig; only those given override the config file.
struct Overrides {
  std::string config_file;
  std::optional<std::string> train, log, embeddings, coords, rule_pack, topic_assignments, store, pair, stopwords;
  std::optional<std::string> kde_acceleration;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_density, chrf_order;
  std::optional<double> kde_tolerance, chrf_beta, cluster_radius, keyword_min_score, expansion_radius;
  std::optional<std::size_t> sample_size, top_k, min_cluster_size, keyword_count, seeds_per_topic, preview_size;
  bool no_normalize = false;
  bool emoji_multiset = false;
  bool keep_whitespace = false;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_config) {
  if (with_config) cmd->add_option("-c,--config", o.config_file, "pipeline config JSON");
  cmd->add_option("--train", o.train, "train JSONL");
  cmd->add_option("--log", o.log, "usage log JSONL");
  cmd->add_option("--embeddings", o.embeddings, "embedding file (JSONL or AEMB)");
  cmd->add_option("--coords", o.coords, "precomputed 2D coordinates JSONL");
  cmd->add_option("--rule-pack", o.rule_pack, "rule pack directory");
  cmd->add_option("--topic-assignments", o.topic_assignments, "external topic labels JSONL");
  cmd->add_option("--store", o.store, "artifact store directory");
  cmd->add_option("--pair", o.pair, "language pair, e.g. en-es");
  cmd->add_option("--seed", o.seed, "global RNG seed");
  cmd->add_flag("--no-normalize", o.no_normalize, "keep embeddings unnormalized");
  cmd->add_flag("--emoji-multiset", o.emoji_multiset, "compare emoji as multisets");
  cmd->add_option("--grid-density", o.grid_density, "familiarity grid cells per axis");
  cmd->add_option("--kde-acceleration", o.kde_acceleration, "exact or tree")->check(CLI::IsMember({"exact", "tree"}));
  cmd->add_option("--kde-tolerance", o.kde_tolerance, "tree mode relative tolerance");
  cmd->add_option("--chrf-order", o.chrf_order, "chrF maximum n-gram order");
  cmd->add_option("--chrf-beta", o.chrf_beta, "chrF beta");
  cmd->add_flag("--chrf-keep-whitespace", o.keep_whitespace, "keep whitespace in chrF n-grams");
  cmd->add_option("--sample-size", o.sample_size, "unfamiliar logs selected for clustering");
  cmd->add_option("--top-k", o.top_k, "topics kept");
  cmd->add_option("--min-cluster-size", o.min_cluster_size, "minimum topic size");
  cmd->add_option("--cluster-radius", o.cluster_radius, "clustering radius (projection units)");
  cmd->add_option("--stopwords", o.stopwords, "stopword list file");
  cmd->add_option("--keyword-count", o.keyword_count, "keywords per set");
  cmd->add_option("--keyword-min-score", o.keyword_min_score, "drop keywords scoring below this");
  cmd->add_option("--seeds-per-topic", o.seeds_per_topic, "expansion seeds per topic");
  cmd->add_option("--expansion-radius", o.expansion_radius, "expansion embedding radius");
  cmd->add_option("--preview-size", o.preview_size, "preview sentences per set");
}

void apply(const Overrides& o, PipelineConfig& c) {
  auto path = [](const std::optional<std::string>& v, fs::path& out) {
    if (v) out = fs::absolute(*v).lexically_normal();
  };
  path(o.train, c.train_file);
  path(o.log, c.log_file);
  path(o.embeddings, c.embedding_file);
  path(o.coords, c.coords_file);
  path(o.rule_pack, c.rule_pack_dir);
  path(o.topic_assignments, c.topic_assignments);
  path(o.store, c.store_dir);
  path(o.stopwords, c.topics.stopword_list);
  if (o.pair) c.language_pair = parse_language_pair(*o.pair);
  if (o.seed) c.rng_seed = *o.seed;
  if (o.no_normalize) c.normalize_embeddings = false;
  if (o.emoji_multiset) c.emoji_multiset = true;
  if (o.grid_density) c.kde.grid_density = *o.grid_density;
  if (o.kde_acceleration) {
    c.kde.acceleration = *o.kde_acceleration == "tree" ? KdeAcceleration::kTree : KdeAcceleration::kExactSum;
  }
  if (o.kde_tolerance) c.kde.relative_tolerance = *o.kde_tolerance;
  if (o.chrf_order) c.chrf.max_order = *o.chrf_order;
  if (o.chrf_beta) c.chrf.beta = *o.chrf_beta;
  if (o.keep_whitespace) c.chrf.remove_whitespace = false;
  if (o.sample_size) c.topics.sample_size = *o.sample_size;
  if (o.top_k) c.topics.top_k_topics = *o.top_k;
  if (o.min_cluster_size) c.topics.min_cluster_size = *o.min_cluster_size;
  if (o.cluster_radius) c.topics.cluster_radius = *o.cluster_radius;
  if (o.keyword_count) c.topics.keyword_count = *o.keyword_count;
  if (o.keyword_min_score) c.topics.keyword_min_score = *o.keyword_min_score;
  if (o.seeds_per_topic) c.expansion.seeds_per_topic = *o.seeds_per_topic;
  if (o.expansion_radius) c.expansion.radius = *o.expansion_radius;
  if (o.preview_size) c.preview_size = *o.preview_size;
}

PipelineConfig fresh_config(const Overrides& o) {
  PipelineConfig c = o.config_file.empty() ? PipelineConfig{} : load_config(o.config_file);
  apply(o, c);
  c.validate();
  return c;
}

fs::path lock_path(const fs::path& store) {
  const auto p = store.lexically_normal();
  return (p.has_filename() ? p : p.parent_path()).string() + ".lock";
}

void print_summary(const PipelineState& state, bool json) {
  if (json) {
    std::cout << summary_json(state).dump(2) << '\n';
    return;
  }
  if (state.sets) std::cout << format_summary_table(summarize(*state.sets));
  std::cout << state.corpus.n_train() << " train, " << state.corpus.n_log() << " log records";
  if (state.corpus.dropped_empty() > 0) std::cout << " (" << state.corpus.dropped_empty() << " empty dropped)";
  std::cout << "; store " << state.config.store_dir.string() << '\n';
}

// Stage subcommand on an existing store: load, run, persist.
int run_store_stage(const Overrides& o, const std::function<void(PipelineState&)>& stage, bool json) {
  if (!o.store) throw InputError("--store is required");
  const ArtifactStore store(*o.store);
  LockFile lock(lock_path(store.root()));
  PipelineState state = load_state(store);
  apply(o, state.config);
  state.config.validate();
  stage(state);
  save_state(state, store);
  if (json || state.sets) print_summary(state, json);
  return 0;
}

SentenceFilter export_filter(const std::multimap<std::string, std::string>& params,
                             const std::vector<ChallengeSet>& sets) {
  return parse_filter(params, sets);
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Challenge-set mining and triage for machine translation"};
  app.require_subcommand(1);
  bool json = false;
  Overrides o;

  auto* run = app.add_subcommand("run", "run the full pipeline");
  add_overrides(run, o, true);
  run->add_flag("--json", json, "machine-readable summary");

  auto* ingest_cmd = app.add_subcommand("ingest", "read inputs and attach embeddings into a new store");
  add_overrides(ingest_cmd, o, true);

  struct StageCmd {
    const char* name;
    const char* help;
    void (*fn)(PipelineState&);
  };
  const StageCmd stages[] = {
      {"project", "2D projection (import or linear fallback)", stage_project},
      {"familiarity", "fit the KDE, build grids and score logs", stage_familiarity},
      {"rules", "run the unit-test rules", stage_rules},
      {"chrf", "score training translations", stage_chrf},
      {"topics", "select unfamiliar logs, cluster and extract keywords", stage_topics},
      {"build-sets", "expand topics, assemble sets and metrics", stage_build_sets},
  };
  std::vector<std::pair<CLI::App*, const StageCmd*>> stage_cmds;
  for (const auto& s : stages) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_overrides(cmd, o, false);
    cmd->add_flag("--json", json, "machine-readable summary");
    stage_cmds.emplace_back(cmd, &s);
  }

  std::string store_dir, host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve a store over HTTP");
  serve->add_option("--store", store_dir, "artifact store directory")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port");

  std::string set_id, out_file, time_from, time_to, kw_mode, q, overlap_set;
  std::vector<std::string> keywords, provenance;
  std::optional<double> chrf_min, chrf_max, fa_min, fa_max;
  auto* export_cmd = app.add_subcommand("export", "write a (filtered) set as JSONL");
  export_cmd->add_option("--store", store_dir, "artifact store directory")->required();
  export_cmd->add_option("--set", set_id, "set id")->required();
  export_cmd->add_option("-o,--out", out_file, "output file")->required();
  export_cmd->add_option("--time-from", time_from, "RFC 3339 lower bound (logs)");
  export_cmd->add_option("--time-to", time_to, "RFC 3339 upper bound (logs)");
  export_cmd->add_option("--keywords", keywords, "keywords")->delimiter(',');
  export_cmd->add_option("--kw-mode", kw_mode, "or|and")->check(CLI::IsMember({"or", "and"}));
  export_cmd->add_option("--chrf-min", chrf_min, "chrF lower bound (train)");
  export_cmd->add_option("--chrf-max", chrf_max, "chrF upper bound (train)");
  export_cmd->add_option("--fa-min", fa_min, "familiarity lower bound (logs)");
  export_cmd->add_option("--fa-max", fa_max, "familiarity upper bound (logs)");
  export_cmd->add_option("--provenance", provenance, "provenance values")->delimiter(',');
  export_cmd->add_option("--q", q, "substring search");
  export_cmd->add_option("--overlap-set", overlap_set, "only members also in this set");

  DemoOptions demo_options;
  std::string demo_dir;
  auto* demo = app.add_subcommand("demo", "write the synthetic demo corpus and config");
  demo->add_option("-o,--out", demo_dir, "output directory")->required();
  demo->add_option("--train", demo_options.n_train, "train records");
  demo->add_option("--log", demo_options.n_log, "log records");
  demo->add_option("--topics", demo_options.unfamiliar_topics, "planted niche topics");
  demo->add_option("--dim", demo_options.dim, "embedding dimension");
  demo->add_option("--seed", demo_options.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInputError;
  }

  if (*run) {
    const auto config = fresh_config(o);
    const auto state = run_pipeline(config);
    print_summary(state, json);
    return 0;
  }
  if (*ingest_cmd) {
    const auto config = fresh_config(o);
    const ArtifactStore store(config.store_dir);
    if (fs::exists(store.root()) && !fs::is_empty(store.root()) && !store.exists("config.json")) {
      throw InputError(store.root().string() + " exists and is not an artifact store");
    }
    fs::create_directories(store.root().lexically_normal().parent_path().empty()
                               ? fs::path(".")
                               : store.root().lexically_normal().parent_path());
    LockFile lock(lock_path(store.root()));
    fs::remove_all(store.root());
    PipelineState state;
    state.config = config;
    stage_ingest(state);
    save_state(state, store);
    print_summary(state, false);
    return 0;
  }
  for (const auto& [cmd, stage] : stage_cmds) {
    if (*cmd) return run_store_stage(o, stage->fn, json);
  }
  if (*serve) {
    TriageService service(store_dir);
    service.serve(host, port);
    return 0;
  }
  if (*export_cmd) {
    TriageService service(store_dir);
    const auto sets = service.sets();
    const auto it = std::find_if(sets.begin(), sets.end(), [&](const auto& s) { return s.set_id == set_id; });
    if (it == sets.end()) throw InputError("unknown set \"" + set_id + "\"");
    std::multimap<std::string, std::string> params;
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) params.emplace(key, v);
    };
    auto put_number = [&](const char* key, const std::optional<double>& v) {
      if (v) params.emplace(key, nlohmann::json(*v).dump());
    };
    put("time_from", time_from);
    put("time_to", time_to);
    put("kw_mode", kw_mode);
    put("q", q);
    put("overlap_set", overlap_set);
    for (const auto& k : keywords) put("keywords", k);
    for (const auto& p : provenance) put("provenance", p);
    put_number("chrf_min", chrf_min);
    put_number("chrf_max", chrf_max);
    put_number("fa_min", fa_min);
    put_number("fa_max", fa_max);
    const auto rows = export_set(*it, service.corpus(), export_filter(params, sets), sets, out_file);
    std::cout << rows << " rows written to " << out_file << '\n';
    return 0;
  }
  if (*demo) {
    const auto files = write_demo(demo_dir, demo_options);
    std::cout << "demo corpus written; run: mtriage run --config " << files.config_file.string() << '\n';
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kStageError;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kStageError;
  }
}
