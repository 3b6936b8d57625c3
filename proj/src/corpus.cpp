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

#include "mtriage/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "binary_io.hpp"
#include "json.hpp"
#include "mtriage/record_json.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

using nlohmann::json;

namespace {

constexpr char kEmbeddingMagic[4] = {'A', 'E', 'M', 'B'};

bool blank(std::string_view s) {
  for (const char32_t c : utf8::decode(s)) {
    if (!utf8::is_whitespace(c)) return false;
  }
  return true;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

template <typename Fn>
void for_each_jsonl_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(location(path, line_no) + ": malformed JSON (" + e.what() + ")");
    }
    fn(j, line_no);
  }
}

std::string input_string(const json& j, const char* key, const std::string& where, bool required) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw InputError(where + ": missing field \"" + key + "\"");
    return {};
  }
  if (!it->is_string()) throw InputError(where + ": field \"" + key + "\" must be a string");
  auto value = it->get<std::string>();
  if (!utf8::is_valid(value)) throw InputError(where + ": field \"" + key + "\" is not valid UTF-8");
  return value;
}

// Returns nullopt when the record is dropped for an empty source.
std::optional<SentenceRecord> parse_input_record(const json& j, Origin origin, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  SentenceRecord r;
  r.origin = origin;
  r.id = input_string(j, "id", where, true);
  if (r.id.empty()) throw InputError(where + ": empty id");
  r.source_text = input_string(j, "source", where, true);
  r.translation_text = input_string(j, "translation", where, true);
  r.provenance = input_string(j, "provenance", where, false);
  if (r.provenance.empty()) r.provenance = "unknown";
  const bool has_reference = j.contains("reference") && !j["reference"].is_null();
  const bool has_timestamp = j.contains("timestamp") && !j["timestamp"].is_null();
  if (origin == Origin::kTrain) {
    if (!has_reference) throw InputError(where + ": train record \"" + r.id + "\" is missing \"reference\"");
    if (has_timestamp) throw InputError(where + ": train record \"" + r.id + "\" must not carry \"timestamp\"");
    r.reference_text = input_string(j, "reference", where, true);
  } else {
    if (has_reference) throw InputError(where + ": log record \"" + r.id + "\" must not carry \"reference\"");
    if (!has_timestamp) throw InputError(where + ": log record \"" + r.id + "\" is missing \"timestamp\"");
    const auto ts = parse_rfc3339(input_string(j, "timestamp", where, true));
    if (!ts) throw InputError(where + ": log record \"" + r.id + "\" has an invalid RFC 3339 timestamp");
    r.timestamp = *ts;
  }
  if (blank(r.source_text)) return std::nullopt;
  return r;
}

}  // namespace

std::string_view to_string(Origin origin) { return origin == Origin::kTrain ? "train" : "log"; }

Origin parse_origin(std::string_view text) {
  if (text == "train") return Origin::kTrain;
  if (text == "log") return Origin::kLog;
  throw InputError("unknown origin '" + std::string(text) + "'");
}

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<float> data) : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0 && !data_.empty()) throw InputError("embedding dimension must be positive");
  if (dim_ != 0 && data_.size() % dim_ != 0) throw InputError("embedding data is not a multiple of the dimension");
}

Corpus::Corpus(LanguagePair pair, std::vector<SentenceRecord> records)
    : language_pair_(std::move(pair)), records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw InputError("duplicate record id \"" + records_[i].id + "\"");
    }
    (records_[i].is_train() ? n_train_ : n_log_)++;
  }
}

const SentenceRecord& Corpus::at(std::string_view id) const {
  const auto idx = index_of(id);
  if (!idx) throw InputError("unknown record id \"" + std::string(id) + "\"");
  return records_[*idx];
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> Corpus::embedding(const SentenceRecord& record) const {
  if (!record.embedding_ref || *record.embedding_ref >= embeddings_.size()) {
    throw InputError("record \"" + record.id + "\" has no attached embedding");
  }
  return embeddings_.row(*record.embedding_ref);
}

void Corpus::validate() const {
  for (const auto& r : records_) {
    const std::string where = "record \"" + r.id + "\"";
    if (r.is_train() != r.reference_text.has_value()) {
      throw InputError(where + ": reference_text must be present exactly for train records");
    }
    if (r.is_train() == r.timestamp.has_value()) {
      throw InputError(where + ": timestamp must be present exactly for log records");
    }
    if (r.chrf && (r.is_log() || *r.chrf < 0.0 || *r.chrf > 1.0)) {
      throw InputError(where + ": chrf must lie in [0,1] and only on train records");
    }
    if (r.familiarity && (r.is_train() || !r.projection)) {
      throw InputError(where + ": familiarity requires a projected log record");
    }
  }
}

Corpus ingest(const std::filesystem::path& train_file, const std::filesystem::path& log_file,
              const LanguagePair& pair) {
  std::vector<SentenceRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t dropped = 0;
  auto read = [&](const std::filesystem::path& path, Origin origin) {
    for_each_jsonl_line(path, [&](const json& j, std::size_t line_no) {
      const std::string where = location(path, line_no);
      auto record = parse_input_record(j, origin, where);
      if (!record) {
        ++dropped;
        return;
      }
      if (!seen.insert(record->id).second) {
        throw InputError(where + ": duplicate id \"" + record->id + "\"");
      }
      records.push_back(std::move(*record));
    });
  };
  read(train_file, Origin::kTrain);
  read(log_file, Origin::kLog);
  Corpus corpus(pair, std::move(records));
  corpus.set_dropped_empty(dropped);
  return corpus;
}

std::vector<EmbeddingEntry> read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  std::vector<EmbeddingEntry> entries;
  if (in.gcount() == 4 && std::equal(magic, magic + 4, kEmbeddingMagic)) {
    std::uint32_t dim = 0;
    if (!detail::read_u32(in, dim) || dim == 0) throw InputError(path.string() + ": bad embedding header");
    std::uint32_t id_len = 0;
    while (detail::read_u32(in, id_len)) {
      EmbeddingEntry e;
      e.id.resize(id_len);
      if (!in.read(e.id.data(), id_len)) throw InputError(path.string() + ": truncated record id");
      e.vector.resize(dim);
      for (auto& v : e.vector) {
        if (!detail::read_f32(in, v)) throw InputError(path.string() + ": truncated vector for \"" + e.id + "\"");
      }
      entries.push_back(std::move(e));
    }
    return entries;
  }
  in.close();
  for_each_jsonl_line(path, [&](const json& j, std::size_t line_no) {
    const std::string where = location(path, line_no);
    EmbeddingEntry e;
    e.id = input_string(j, "id", where, true);
    const auto it = j.find("vector");
    if (it == j.end() || !it->is_array()) throw InputError(where + ": missing \"vector\" array");
    e.vector.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number()) throw InputError(where + ": non-numeric vector component for \"" + e.id + "\"");
      e.vector.push_back(static_cast<float>(v.get<double>()));
    }
    entries.push_back(std::move(e));
  });
  return entries;
}

void write_embeddings_jsonl(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries) {
  std::ofstream out(path);
  if (!out) throw StageError("cannot write " + path.string());
  for (const auto& e : entries) {
    json j;
    j["id"] = e.id;
    auto& vec = j["vector"] = json::array();
    // float -> double is exact, and the shortest round-trip double text parses back to the same float.
    for (const float v : e.vector) vec.push_back(static_cast<double>(v));
    out << j.dump() << '\n';
  }
}

void write_embeddings_binary(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  const std::uint32_t dim = entries.empty() ? 0 : static_cast<std::uint32_t>(entries.front().vector.size());
  out.write(kEmbeddingMagic, 4);
  detail::write_u32(out, dim);
  for (const auto& e : entries) {
    if (e.vector.size() != dim) throw InputError("embedding dimension mismatch for \"" + e.id + "\"");
    detail::write_u32(out, static_cast<std::uint32_t>(e.id.size()));
    out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
    for (const float v : e.vector) detail::write_f32(out, v);
  }
}

void write_corpus_embeddings(const Corpus& corpus, const std::filesystem::path& path) {
  std::vector<EmbeddingEntry> entries;
  entries.reserve(corpus.size());
  for (const auto& r : corpus.records()) {
    const auto row = corpus.embedding(r);
    entries.push_back({r.id, std::vector<float>(row.begin(), row.end())});
  }
  write_embeddings_binary(path, entries);
}

void attach_embeddings(Corpus& corpus, const std::filesystem::path& embedding_file, bool normalize) {
  auto entries = read_embedding_file(embedding_file);
  std::unordered_map<std::string, std::size_t> by_id;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.vector.empty()) throw InputError("empty embedding vector for \"" + e.id + "\"");
    if (dim == 0) dim = e.vector.size();
    if (e.vector.size() != dim) {
      throw InputError("embedding dimension mismatch for \"" + e.id + "\": expected " + std::to_string(dim) +
                       ", got " + std::to_string(e.vector.size()));
    }
    if (!by_id.emplace(e.id, i).second) throw InputError("duplicate embedding id \"" + e.id + "\"");
  }
  std::vector<float> data;
  data.reserve(corpus.size() * dim);
  auto& records = corpus.mutable_records();
  for (std::size_t row = 0; row < records.size(); ++row) {
    auto& r = records[row];
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw InputError("embedding file is missing id \"" + r.id + "\"");
    const auto& vec = entries[it->second].vector;
    double norm2 = 0.0;
    for (const float v : vec) {
      if (!std::isfinite(v)) throw InputError("non-finite embedding component for \"" + r.id + "\"");
      norm2 += static_cast<double>(v) * v;
    }
    if (normalize) {
      if (norm2 == 0.0) throw InputError("zero embedding vector for \"" + r.id + "\" cannot be normalized");
      const double inv = 1.0 / std::sqrt(norm2);
      for (const float v : vec) data.push_back(static_cast<float>(v * inv));
    } else {
      data.insert(data.end(), vec.begin(), vec.end());
    }
    r.embedding_ref = row;
  }
  corpus.set_embeddings(EmbeddingStore(dim, std::move(data)));
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["format"] = "mtriage-corpus";
  header["version"] = 1;
  header["language_pair"] = corpus.language_pair().code();
  header["n_train"] = corpus.n_train();
  header["n_log"] = corpus.n_log();
  header["dropped_empty"] = corpus.dropped_empty();
  out << header.dump() << '\n';
  for (const auto& r : corpus.records()) out << record_to_json(r).dump() << '\n';
  return out.str();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << serialize_corpus(corpus);
  if (!out) throw StageError("failed writing " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty corpus file");
  const json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "mtriage-corpus") {
    throw InputError(path.string() + ": not a corpus file");
  }
  std::vector<SentenceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InputError(location(path, line_no) + ": malformed JSON");
    records.push_back(record_from_json(j, location(path, line_no)));
  }
  Corpus corpus(parse_language_pair(header.at("language_pair").get<std::string>()), std::move(records));
  corpus.set_dropped_empty(header.value("dropped_empty", std::size_t{0}));
  corpus.validate();
  return corpus;
}

}  // namespace mtriage
