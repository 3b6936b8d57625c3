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

#include <gtest/gtest.h>

#include <cmath>

#include "mtriage/corpus.hpp"
#include "mtriage/record_json.hpp"
#include "test_support.hpp"

using namespace mtriage;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

struct Inputs {
  TempDir dir{"corpus"};
  std::filesystem::path train = dir / "train.jsonl";
  std::filesystem::path log = dir / "log.jsonl";

  Inputs(std::string_view train_text, std::string_view log_text) {
    write_file(train, train_text);
    write_file(log, log_text);
  }
};

constexpr std::string_view kTrain =
    R"({"id":"t1","source":"Hello","translation":"Hola","reference":"Hola","provenance":"news"})"
    "\n"
    R"({"id":"t2","source":"Bye","translation":"Adiós","reference":"Adiós"})"
    "\n";
constexpr std::string_view kLog =
    R"({"id":"l1","source":"Thanks","translation":"Gracias","timestamp":"2024-01-02T03:04:05Z","provenance":"app"})"
    "\n\n"
    R"({"id":"l2","source":"   ","translation":"","timestamp":"2024-01-02T03:04:05Z"})"
    "\n";

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Ingest, ReadsBothFilesAndDropsBlankSources) {
  Inputs in(kTrain, kLog);
  const Corpus c = ingest(in.train, in.log, {"en", "es"});
  EXPECT_EQ(c.n_train(), 2u);
  EXPECT_EQ(c.n_log(), 1u);
  EXPECT_EQ(c.dropped_empty(), 1u);
  EXPECT_EQ(c.at("t2").provenance, "unknown");
  EXPECT_EQ(*c.at("t1").reference_text, "Hola");
  EXPECT_EQ(format_rfc3339(*c.at("l1").timestamp), "2024-01-02T03:04:05Z");
  EXPECT_FALSE(c.at("l1").reference_text);
}

TEST(Ingest, SchemaViolationsNameFileAndLine) {
  {
    Inputs in(R"({"id":"t1","source":"a","translation":"b"})", "");
    const auto msg = error_of([&] { ingest(in.train, in.log, {"en", "es"}); });
    EXPECT_NE(msg.find("train.jsonl:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("reference"), std::string::npos) << msg;
  }
  {
    Inputs in(kTrain, R"({"id":"l1","source":"a","translation":"b","timestamp":"soon"})");
    const auto msg = error_of([&] { ingest(in.train, in.log, {"en", "es"}); });
    EXPECT_NE(msg.find("log.jsonl:1"), std::string::npos) << msg;
  }
  {
    Inputs in(kTrain, R"({"id":"l1","source":"a","translation":"b","timestamp":"2024-01-01T00:00:00Z","reference":"x"})");
    EXPECT_NE(error_of([&] { ingest(in.train, in.log, {"en", "es"}); }).find("reference"), std::string::npos);
  }
  {
    Inputs in(R"({"id":"t1","source":"a","translation":"b","reference":"c","timestamp":"2024-01-01T00:00:00Z"})", "");
    EXPECT_NE(error_of([&] { ingest(in.train, in.log, {"en", "es"}); }).find("timestamp"), std::string::npos);
  }
  {
    Inputs in("{not json}\n", "");
    EXPECT_NE(error_of([&] { ingest(in.train, in.log, {"en", "es"}); }).find("train.jsonl:1"), std::string::npos);
  }
  {
    Inputs in(kTrain, R"({"id":"t1","source":"a","translation":"b","timestamp":"2024-01-01T00:00:00Z"})");
    EXPECT_NE(error_of([&] { ingest(in.train, in.log, {"en", "es"}); }).find("t1"), std::string::npos);
  }
  {
    Inputs in(R"({"id":"t1","source":"aÿ","translation":7,"reference":"c"})", "");
    EXPECT_NE(error_of([&] { ingest(in.train, in.log, {"en", "es"}); }).find("translation"), std::string::npos);
  }
}

TEST(Embeddings, JsonlAndBinaryRoundTrip) {
  TempDir dir("emb");
  const std::vector<EmbeddingEntry> entries = {{"a", {1.0f, 2.0f, 3.0f}}, {"b", {-0.5f, 0.25f, 1e-7f}}};
  write_embeddings_jsonl(dir / "e.jsonl", entries);
  write_embeddings_binary(dir / "e.aemb", entries);
  for (const char* name : {"e.jsonl", "e.aemb"}) {
    const auto back = read_embedding_file(dir / name);
    ASSERT_EQ(back.size(), 2u) << name;
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(back[i].id, entries[i].id);
      EXPECT_EQ(back[i].vector, entries[i].vector) << name;
    }
  }
}

TEST(Embeddings, AttachNormalizesAndValidates) {
  Inputs in(kTrain, kLog);
  Corpus c = ingest(in.train, in.log, {"en", "es"});
  write_embeddings_jsonl(in.dir / "ok.jsonl", std::vector<EmbeddingEntry>{
                                                  {"t1", {3, 4}}, {"t2", {0, 2}}, {"l1", {1, 1}}, {"extra", {1, 0}}});
  attach_embeddings(c, in.dir / "ok.jsonl");
  const auto v = c.embedding(c.at("t1"));
  EXPECT_FLOAT_EQ(v[0], 0.6f);
  EXPECT_FLOAT_EQ(v[1], 0.8f);

  Corpus raw = ingest(in.train, in.log, {"en", "es"});
  attach_embeddings(raw, in.dir / "ok.jsonl", false);
  EXPECT_FLOAT_EQ(raw.embedding(raw.at("t1"))[0], 3.0f);

  auto expect_error = [&](std::vector<EmbeddingEntry> entries, std::string_view needle) {
    Corpus fresh = ingest(in.train, in.log, {"en", "es"});
    write_embeddings_jsonl(in.dir / "bad.jsonl", entries);
    const auto msg = error_of([&] { attach_embeddings(fresh, in.dir / "bad.jsonl"); });
    EXPECT_NE(msg.find(needle), std::string::npos) << msg;
  };
  expect_error({{"t1", {1, 0}}, {"t2", {1, 0}}}, "missing id \"l1\"");
  expect_error({{"t1", {1, 0}}, {"t2", {1, 0, 0}}, {"l1", {1, 0}}}, "dimension");
  expect_error({{"t1", {0, 0}}, {"t2", {1, 0}}, {"l1", {1, 0}}}, "zero embedding");
  expect_error({{"t1", {1, 0}}, {"t1", {1, 0}}, {"t2", {1, 0}}, {"l1", {1, 0}}}, "duplicate");
}

TEST(Embeddings, RejectsNonFiniteBinaryComponents) {
  Inputs in(kTrain, kLog);
  Corpus c = ingest(in.train, in.log, {"en", "es"});
  write_embeddings_binary(in.dir / "nan.aemb", std::vector<EmbeddingEntry>{
                                                   {"t1", {NAN, 0}}, {"t2", {1, 0}}, {"l1", {1, 0}}});
  EXPECT_NE(error_of([&] { attach_embeddings(c, in.dir / "nan.aemb"); }).find("non-finite"), std::string::npos);
}

TEST(CorpusStore, SaveLoadPreservesEveryField) {
  Inputs in(kTrain, kLog);
  Corpus c = ingest(in.train, in.log, {"en", "es"});
  auto& recs = c.mutable_records();
  recs[0].projection = Point2{0.1, -2.5};
  recs[0].chrf = 0.123456789012345;
  recs[0].failed_rules = {"comma", "question"};
  recs[0].embedding_ref = 0;
  recs[2].projection = Point2{3, 4};
  recs[2].familiarity = -7.25;
  recs[2].topic_id = 3;
  save_corpus(c, in.dir / "c.jsonl");
  const Corpus back = load_corpus(in.dir / "c.jsonl");
  EXPECT_EQ(back.records(), c.records());
  EXPECT_EQ(back.dropped_empty(), 1u);
  EXPECT_EQ(back.language_pair().code(), "en-es");
}

TEST(CorpusStore, LoadRejectsInvariantViolations) {
  testing_support::TempDir dir("invariants");
  auto t = testing_support::train_record("t", "a", "b", "c");
  t.familiarity = -1.0;
  save_corpus(Corpus({"en", "es"}, {t}), dir / "train_fa.jsonl");
  EXPECT_THROW(load_corpus(dir / "train_fa.jsonl"), InputError);
  auto l = testing_support::log_record("l", "a", "b", "2024-01-01T00:00:00Z");
  l.chrf = 0.5;
  save_corpus(Corpus({"en", "es"}, {l}), dir / "log_chrf.jsonl");
  EXPECT_THROW(load_corpus(dir / "log_chrf.jsonl"), InputError);
  // The parser itself keeps the fields; the corpus-level check rejects them.
  EXPECT_TRUE(record_from_json(record_to_json(l), "x").chrf);
}

TEST(CorpusStore, DuplicateIdsRejected) {
  std::vector<SentenceRecord> recs = {testing_support::train_record("x", "a", "b", "c"),
                                      testing_support::log_record("x", "a", "b", "2024-01-01T00:00:00Z")};
  EXPECT_THROW(Corpus({"en", "es"}, recs), InputError);
}
