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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mtriage/contour.hpp"
#include "mtriage/corpus.hpp"
#include "mtriage/pipeline.hpp"
#include "mtriage/sets.hpp"
#include "mtriage/store.hpp"

namespace mtriage {

using QueryParams = std::multimap<std::string, std::string>;

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

// Parses the sentence filter query parameters (page/page_size are ignored here).
// Throws InputError on malformed values or unknown parameters.
SentenceFilter parse_filter(const QueryParams& query, const std::vector<ChallengeSet>& sets);

// The HTTP+JSON API over one artifact store. Routing lives in handle() so it can
// be exercised without sockets; serve()/start() bind it to an HTTP server.
class TriageService {
 public:
  // Loads a complete store and replays its edit journal.
  explicit TriageService(std::filesystem::path store_root);
  ~TriageService();
  TriageService(const TriageService&) = delete;
  TriageService& operator=(const TriageService&) = delete;

  HttpResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                      std::string_view body);

  // Blocking.
  void serve(const std::string& host, int port);
  // Background server; port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

  // Copies for inspection.
  std::vector<ChallengeSet> sets() const;
  const Corpus& corpus() const { return corpus_; }

 private:
  HttpResponse list_sets(const QueryParams& query) const;
  HttpResponse get_set(const ChallengeSet& set) const;
  HttpResponse preview(const ChallengeSet& set) const;
  HttpResponse sentences(const ChallengeSet& set, const QueryParams& query) const;
  HttpResponse embedding(const ChallengeSet& set) const;
  HttpResponse summary() const;
  HttpResponse post_edit(const std::string& set_id, std::string_view body);
  HttpResponse export_rows(const ChallengeSet& set, const QueryParams& query, std::string_view body) const;

  void apply(const JournalEntry& entry);
  const ChallengeSet* find(std::string_view set_id) const;

  ArtifactStore store_;
  PipelineConfig config_;
  Corpus corpus_;
  std::vector<ChallengeSet> sets_;
  std::vector<ContourLevel> train_contours_;
  std::vector<ContourLevel> log_contours_;
  mutable std::shared_mutex mutex_;

  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace mtriage
