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

#include "mtriage/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mtriage {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kConfig = "config.json";
constexpr std::string_view kCorpus = "corpus.jsonl";
constexpr std::string_view kEmbeddings = "embeddings.aemb";
constexpr std::string_view kProjection = "projection.json";
constexpr std::string_view kTopics = "topics.json";
constexpr std::string_view kManifest = "manifest.json";
constexpr std::string_view kJournal = "edits.jsonl";
constexpr std::string_view kSetsDir = "sets";

json parse_file(const std::filesystem::path& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError(path.string() + ": malformed JSON");
  return j;
}

std::string_view projection_kind_name(ProjectionKind kind) {
  return kind == ProjectionKind::kImported ? "imported" : "linear-fallback";
}

ordered_json keywords_json(const std::vector<Keyword>& keywords) {
  ordered_json out = ordered_json::array();
  for (const auto& k : keywords) out.push_back({{"term", k.term}, {"score", k.score}});
  return out;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw StageError("failed writing " + path.string());
}

ArtifactStore::ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {}

bool ArtifactStore::exists(std::string_view name) const { return std::filesystem::exists(file(name)); }

void ArtifactStore::create_directories() const {
  std::error_code ec;
  std::filesystem::create_directories(root_ / kSetsDir, ec);
  if (ec) throw StageError("cannot create " + (root_ / kSetsDir).string() + ": " + ec.message());
}

void ArtifactStore::save_config(const ordered_json& config) const {
  write_text_file(file(kConfig), config.dump(2) + "\n");
}

json ArtifactStore::load_config() const {
  if (!exists(kConfig)) throw InputError(root_.string() + " has no config.json; not an artifact store");
  return parse_file(file(kConfig));
}

void ArtifactStore::save_corpus(const Corpus& corpus) const {
  mtriage::save_corpus(corpus, file(kCorpus));
  if (!corpus.embeddings().empty()) write_corpus_embeddings(corpus, file(kEmbeddings));
}

Corpus ArtifactStore::load_corpus() const {
  if (!exists(kCorpus)) throw InputError(root_.string() + ": corpus.jsonl missing; run ingest first");
  Corpus corpus = mtriage::load_corpus(file(kCorpus));
  if (exists(kEmbeddings)) attach_embeddings(corpus, file(kEmbeddings), false);
  return corpus;
}

void ArtifactStore::save_projection(const ProjectionModel& model) const {
  ordered_json j;
  j["kind"] = projection_kind_name(model.kind);
  j["bounds"] = {{"min_x", model.bounds.min_x},
                 {"max_x", model.bounds.max_x},
                 {"min_y", model.bounds.min_y},
                 {"max_y", model.bounds.max_y}};
  j["scale_x"] = model.scale_x;
  j["scale_y"] = model.scale_y;
  j["mean"] = model.mean;
  j["basis"] = model.basis;
  write_text_file(file(kProjection), j.dump() + "\n");
}

ProjectionModel ArtifactStore::load_projection() const {
  if (!exists(kProjection)) throw InputError(root_.string() + ": projection.json missing; run project first");
  const json j = parse_file(file(kProjection));
  ProjectionModel m;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "imported") {
    m.kind = ProjectionKind::kImported;
  } else if (kind == "linear-fallback") {
    m.kind = ProjectionKind::kLinearFallback;
  } else {
    throw InputError("unknown projection kind \"" + kind + "\"");
  }
  const auto& b = j.at("bounds");
  m.bounds = {b.at("min_x").get<double>(), b.at("max_x").get<double>(), b.at("min_y").get<double>(),
              b.at("max_y").get<double>()};
  m.scale_x = j.at("scale_x").get<double>();
  m.scale_y = j.at("scale_y").get<double>();
  m.mean = j.at("mean").get<std::vector<double>>();
  m.basis = j.at("basis").get<std::vector<double>>();
  return m;
}

void ArtifactStore::save_grid(std::string_view name, const FamiliarityGrid& grid) const {
  mtriage::save_grid(grid, file(name));
}

std::optional<FamiliarityGrid> ArtifactStore::load_grid(std::string_view name) const {
  if (!exists(name)) return std::nullopt;
  return mtriage::load_grid(file(name));
}

void ArtifactStore::save_topics(const std::vector<Topic>& topics) const {
  ordered_json arr = ordered_json::array();
  for (const auto& t : topics) {
    ordered_json j;
    j["topic_id"] = t.topic_id;
    j["name"] = name_topic(t);
    j["member_ids"] = t.member_ids;
    j["keywords"] = keywords_json(t.keywords);
    arr.push_back(std::move(j));
  }
  write_text_file(file(kTopics), arr.dump() + "\n");
}

std::vector<Topic> ArtifactStore::load_topics() const {
  if (!exists(kTopics)) throw InputError(root_.string() + ": topics.json missing; run topics first");
  std::vector<Topic> out;
  for (const auto& j : parse_file(file(kTopics))) {
    Topic t;
    t.topic_id = j.at("topic_id").get<int>();
    t.member_ids = j.at("member_ids").get<std::vector<std::string>>();
    for (const auto& k : j.at("keywords")) t.keywords.push_back({k.at("term"), k.at("score")});
    out.push_back(std::move(t));
  }
  return out;
}

void ArtifactStore::save_sets(const std::vector<ChallengeSet>& sets) const {
  create_directories();
  for (const auto& entry : std::filesystem::directory_iterator(root_ / kSetsDir)) {
    std::filesystem::remove(entry.path());
  }
  ordered_json manifest;
  manifest["format"] = "mtriage-store";
  manifest["version"] = 1;
  ordered_json listed = ordered_json::array();
  for (const auto& s : sets) {
    const std::string text = set_to_json(s).dump() + "\n";
    const std::string rel = std::string(kSetsDir) + "/" + s.set_id + ".json";
    write_text_file(root_ / rel, text);
    listed.push_back({{"set_id", s.set_id},
                      {"name", s.name},
                      {"kind", to_string(s.kind)},
                      {"file", rel},
                      {"hash", content_hash(text)}});
  }
  manifest["sets"] = std::move(listed);
  ordered_json artifacts = ordered_json::object();
  for (const auto name : {kConfig, kCorpus, kEmbeddings, kProjection, std::string_view("familiarity.afgr"),
                          std::string_view("log_density.afgr"), kTopics}) {
    if (exists(name)) artifacts[std::string(name)] = content_hash(read_text_file(file(name)));
  }
  manifest["artifacts"] = std::move(artifacts);
  write_text_file(file(kManifest), manifest.dump(2) + "\n");
  write_text_file(file(kJournal), "");
}

std::vector<ChallengeSet> ArtifactStore::load_sets() const {
  if (!exists(kManifest)) throw InputError(root_.string() + ": manifest.json missing; run build-sets first");
  const json manifest = parse_file(file(kManifest));
  std::vector<ChallengeSet> out;
  for (const auto& entry : manifest.at("sets")) {
    const auto path = root_ / entry.at("file").get<std::string>();
    const std::string text = read_text_file(path);
    if (content_hash(text) != entry.at("hash").get<std::string>()) {
      throw InputError(path.string() + ": content hash does not match the manifest");
    }
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError(path.string() + ": malformed JSON");
    out.push_back(set_from_json(j));
  }
  return out;
}

ordered_json journal_to_json(const JournalEntry& entry) {
  ordered_json payload = ordered_json::object();
  if (entry.edit.op == SetEdit::Op::kRename) {
    payload["name"] = entry.edit.name;
  } else {
    payload["ids"] = entry.edit.ids;
  }
  ordered_json j;
  j["set_id"] = entry.set_id;
  j["op"] = to_string(entry.edit.op);
  j["payload"] = std::move(payload);
  j["version"] = entry.version;
  j["timestamp"] = entry.timestamp;
  return j;
}

JournalEntry journal_from_json(const json& j) {
  JournalEntry e;
  e.set_id = j.at("set_id").get<std::string>();
  e.edit.op = parse_edit_op(j.at("op").get<std::string>());
  const auto& payload = j.at("payload");
  if (e.edit.op == SetEdit::Op::kRename) {
    e.edit.name = payload.at("name").get<std::string>();
  } else {
    e.edit.ids = payload.at("ids").get<std::vector<std::string>>();
  }
  e.version = j.at("version").get<std::uint64_t>();
  e.timestamp = j.value("timestamp", "");
  return e;
}

void ArtifactStore::append_journal(const JournalEntry& entry) const {
  std::ofstream out(file(kJournal), std::ios::binary | std::ios::app);
  if (!out) throw StageError("cannot append to " + file(kJournal).string());
  out << journal_to_json(entry).dump() << '\n';
  out.flush();
  if (!out) throw StageError("failed appending to " + file(kJournal).string());
}

std::vector<JournalEntry> ArtifactStore::read_journal() const {
  std::vector<JournalEntry> out;
  if (!exists(kJournal)) return out;
  std::istringstream in(read_text_file(file(kJournal)));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    // A torn final line from an interrupted append is ignored.
    if (j.is_discarded()) {
      if (in.peek() == EOF) break;
      throw InputError(file(kJournal).string() + ":" + std::to_string(line_no) + ": malformed journal entry");
    }
    out.push_back(journal_from_json(j));
  }
  return out;
}

void ArtifactStore::validate_complete() const {
  for (const auto name : {kConfig, kCorpus, kProjection, std::string_view("familiarity.afgr"), kManifest}) {
    if (!exists(name)) throw InputError(root_.string() + ": incomplete artifact store, missing " + std::string(name));
  }
}

LockFile::LockFile(std::filesystem::path path) : path_(std::move(path)) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw InputError("store is locked by another run (" + path_.string() + "); remove it if no run is active");
    }
    throw StageError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

LockFile::~LockFile() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace mtriage
