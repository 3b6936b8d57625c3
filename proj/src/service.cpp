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

#include "mtriage/service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "mtriage/record_json.hpp"

namespace mtriage {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kDefaultPageSize = 100;
constexpr std::size_t kMaxPageSize = 10000;

HttpResponse json_response(int status, const ordered_json& j) { return {status, j.dump(), "application/json", {}}; }

HttpResponse error_response(int status, std::string_view message) {
  ordered_json j;
  j["error"] = message;
  return json_response(status, j);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    std::string item(text.substr(start, end - start));
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw InputError("parameter " + key + ": \"" + text + "\" is not a number");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("parameter " + key + ": \"" + text + "\" is not a count");
  return v;
}

Timestamp parse_time(const std::string& key, const std::string& text) {
  const auto ts = parse_rfc3339(text);
  if (!ts) throw InputError("parameter " + key + ": \"" + text + "\" is not an RFC 3339 timestamp");
  return *ts;
}

const std::string* single(const QueryParams& q, const char* key) {
  const auto [lo, hi] = q.equal_range(key);
  if (lo == hi) return nullptr;
  if (std::next(lo) != hi) throw InputError("parameter " + std::string(key) + " given more than once");
  return &lo->second;
}

// A JSON object body becomes query parameters (arrays expand to repeats).
QueryParams params_from_body(std::string_view body) {
  QueryParams out;
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return out;
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("request body must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto put = [&](const json& v) {
      if (v.is_null()) return;
      out.emplace(key, v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (value.is_array()) {
      for (const auto& v : value) put(v);
    } else {
      put(value);
    }
  }
  return out;
}

ordered_json sentence_json(const SentenceRecord& r) {
  auto j = record_to_json(r);
  j.erase("embedding_ref");
  return j;
}

ordered_json keywords_json(const std::vector<Keyword>& keywords) {
  ordered_json out = ordered_json::array();
  for (const auto& k : keywords) out.push_back({{"term", k.term}, {"score", k.score}});
  return out;
}

ordered_json contours_json(const std::vector<ContourLevel>& levels) {
  ordered_json out = ordered_json::array();
  for (const auto& l : levels) {
    ordered_json lines = ordered_json::array();
    for (const auto& line : l.polylines) {
      ordered_json pts = ordered_json::array();
      for (const auto& p : line) pts.push_back({p.x, p.y});
      lines.push_back(std::move(pts));
    }
    out.push_back({{"percentile", l.percentile}, {"level", l.level}, {"polylines", std::move(lines)}});
  }
  return out;
}

ordered_json set_summary_json(const ChallengeSet& s) {
  ordered_json j;
  j["set_id"] = s.set_id;
  j["name"] = s.name;
  j["kind"] = std::string(to_string(s.kind));
  j["version"] = s.version;
  j["member_count"] = s.member_ids.size();
  j["removed_count"] = s.removed_ids.size();
  j["keywords"] = keywords_json(s.keywords);
  j["metrics"] = metrics_to_json(s.metrics);
  return j;
}

std::optional<double> sort_value(const ChallengeSet& s, const std::string& key) {
  const auto& m = s.metrics;
  if (key == "log_count") return static_cast<double>(m.log_count);
  if (key == "train_count") return static_cast<double>(m.train_count);
  if (key == "mean_chrf") return m.mean_chrf;
  if (key == "mean_familiarity") return m.mean_familiarity;
  if (key == "train_ratio") return m.train_ratio;
  if (key == "version") return static_cast<double>(s.version);
  return std::nullopt;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string now_rfc3339() {
  return format_rfc3339(std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()));
}

}  // namespace

SentenceFilter parse_filter(const QueryParams& q, const std::vector<ChallengeSet>& sets) {
  static const std::set<std::string, std::less<>> known = {
      "page", "page_size", "time_from", "time_to", "keywords", "kw_mode", "chrf_min", "chrf_max",
      "fa_min", "fa_max", "provenance", "q", "overlap_set"};
  for (const auto& [key, value] : q) {
    if (!known.contains(key)) throw InputError("unknown parameter \"" + key + "\"");
  }
  SentenceFilter f;
  if (const auto* v = single(q, "time_from")) f.time_from = parse_time("time_from", *v);
  if (const auto* v = single(q, "time_to")) f.time_to = parse_time("time_to", *v);
  if (const auto* v = single(q, "chrf_min")) f.chrf_min = parse_number("chrf_min", *v);
  if (const auto* v = single(q, "chrf_max")) f.chrf_max = parse_number("chrf_max", *v);
  if (const auto* v = single(q, "fa_min")) f.fa_min = parse_number("fa_min", *v);
  if (const auto* v = single(q, "fa_max")) f.fa_max = parse_number("fa_max", *v);
  const auto [klo, khi] = q.equal_range("keywords");
  for (auto it = klo; it != khi; ++it) {
    for (auto& k : split_list(it->second)) f.keywords.push_back(std::move(k));
  }
  if (const auto* v = single(q, "kw_mode")) {
    if (*v != "or" && *v != "and") throw InputError("parameter kw_mode must be \"or\" or \"and\"");
    f.keywords_all = *v == "and";
  }
  const auto [plo, phi] = q.equal_range("provenance");
  for (auto it = plo; it != phi; ++it) {
    for (auto& p : split_list(it->second)) f.provenance.insert(std::move(p));
  }
  if (const auto* v = single(q, "q")) f.text = *v;
  if (const auto* v = single(q, "overlap_set")) {
    const bool found = std::any_of(sets.begin(), sets.end(), [&](const auto& s) { return s.set_id == *v; });
    if (!found) throw InputError("unknown overlap set \"" + *v + "\"");
    f.overlap_set = *v;
  }
  return f;
}

struct TriageService::Server {
  httplib::Server http;
  std::thread thread;
};

TriageService::TriageService(std::filesystem::path store_root) : store_(std::move(store_root)) {
  store_.validate_complete();
  config_ = config_from_json(store_.load_config());
  corpus_ = load_corpus(store_.file("corpus.jsonl"));
  sets_ = store_.load_sets();
  for (const auto& entry : store_.read_journal()) apply(entry);
  if (const auto grid = store_.load_grid("familiarity.afgr")) train_contours_ = grid_contours(*grid);
  if (const auto grid = store_.load_grid("log_density.afgr")) log_contours_ = grid_contours(*grid);
}

TriageService::~TriageService() { stop(); }

std::vector<ChallengeSet> TriageService::sets() const {
  std::shared_lock lock(mutex_);
  return sets_;
}

const ChallengeSet* TriageService::find(std::string_view set_id) const {
  for (const auto& s : sets_) {
    if (s.set_id == set_id) return &s;
  }
  return nullptr;
}

void TriageService::apply(const JournalEntry& entry) {
  const auto it = std::find_if(sets_.begin(), sets_.end(), [&](const auto& s) { return s.set_id == entry.set_id; });
  if (it == sets_.end()) throw InputError("edit journal names unknown set \"" + entry.set_id + "\"");
  if (entry.version != it->version + 1) {
    throw InputError("edit journal out of sequence for " + entry.set_id + " at version " +
                     std::to_string(entry.version));
  }
  *it = edit_set(*it, entry.edit, corpus_, sets_);
  refresh_metrics(sets_, corpus_);
}

HttpResponse TriageService::handle(std::string_view method, std::string_view path, const QueryParams& query,
                                   std::string_view body) {
  try {
    const auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "api") return error_response(404, "not found");
    const bool get = method == "GET", post = method == "POST";
    if (parts[1] == "summary" && parts.size() == 2) {
      if (!get) return error_response(405, "method not allowed");
      std::shared_lock lock(mutex_);
      return summary();
    }
    if (parts[1] != "sets") return error_response(404, "not found");
    if (parts.size() == 2) {
      if (!get) return error_response(405, "method not allowed");
      std::shared_lock lock(mutex_);
      return list_sets(query);
    }
    if (parts.size() > 4) return error_response(404, "not found");
    const std::string& set_id = parts[2];
    const std::string action = parts.size() == 4 ? parts[3] : "";

    if (action == "edits") {
      if (!post) return error_response(405, "method not allowed");
      return post_edit(set_id, body);
    }
    std::shared_lock lock(mutex_);
    const ChallengeSet* set = find(set_id);
    if (!set) return error_response(404, "unknown set \"" + set_id + "\"");
    if (action == "export") {
      if (!post) return error_response(405, "method not allowed");
      return export_rows(*set, query, body);
    }
    if (!get) return error_response(405, "method not allowed");
    if (action.empty()) return get_set(*set);
    if (action == "preview") return preview(*set);
    if (action == "sentences") return sentences(*set, query);
    if (action == "embedding") return embedding(*set);
    return error_response(404, "not found");
  } catch (const InputError& e) {
    return error_response(400, e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse TriageService::list_sets(const QueryParams& query) const {
  for (const auto& [key, value] : query) {
    if (key != "sort" && key != "order") throw InputError("unknown parameter \"" + key + "\"");
  }
  const std::string sort = single(query, "sort") ? *single(query, "sort") : "set_id";
  const std::string order = single(query, "order") ? *single(query, "order") : "asc";
  if (order != "asc" && order != "desc") throw InputError("parameter order must be \"asc\" or \"desc\"");
  static const std::set<std::string, std::less<>> columns = {
      "set_id", "name", "log_count", "train_count", "mean_chrf", "mean_familiarity", "train_ratio", "version"};
  if (!columns.contains(sort)) throw InputError("cannot sort by \"" + sort + "\"");
  const bool desc = order == "desc";

  std::vector<const ChallengeSet*> rows;
  for (const auto& s : sets_) rows.push_back(&s);
  std::stable_sort(rows.begin(), rows.end(), [&](const ChallengeSet* a, const ChallengeSet* b) {
    if (sort == "set_id" || sort == "name") {
      const auto& x = sort == "name" ? a->name : a->set_id;
      const auto& y = sort == "name" ? b->name : b->set_id;
      if (x != y) return desc ? y < x : x < y;
      return a->set_id < b->set_id;
    }
    const auto x = sort_value(*a, sort), y = sort_value(*b, sort);
    // Undefined values go last in either direction.
    if (x.has_value() != y.has_value()) return x.has_value();
    if (x && *x != *y) return desc ? *y < *x : *x < *y;
    return a->set_id < b->set_id;
  });
  ordered_json arr = ordered_json::array();
  for (const auto* s : rows) arr.push_back(set_summary_json(*s));
  ordered_json j;
  j["sort"] = sort;
  j["order"] = order;
  j["sets"] = std::move(arr);
  return json_response(200, j);
}

HttpResponse TriageService::get_set(const ChallengeSet& set) const { return json_response(200, set_to_json(set)); }

HttpResponse TriageService::preview(const ChallengeSet& set) const {
  ordered_json sentences = ordered_json::array();
  for (const auto& id : preview_members(set, preview_seed(config_), config_.preview_size)) {
    const auto& r = corpus_.at(id);
    sentences.push_back(
        {{"id", r.id}, {"origin", to_string(r.origin)}, {"source", r.source_text}, {"translation", r.translation_text}});
  }
  ordered_json j;
  j["set_id"] = set.set_id;
  j["name"] = set.name;
  j["sentences"] = std::move(sentences);
  j["keywords"] = keywords_json(set.keywords);
  return json_response(200, j);
}

HttpResponse TriageService::sentences(const ChallengeSet& set, const QueryParams& query) const {
  const auto filter = parse_filter(query, sets_);
  std::size_t page = 0, page_size = kDefaultPageSize;
  if (const auto* v = single(query, "page")) page = parse_count("page", *v);
  if (const auto* v = single(query, "page_size")) page_size = parse_count("page_size", *v);
  if (page_size == 0 || page_size > kMaxPageSize) {
    throw InputError("page_size must be in [1, " + std::to_string(kMaxPageSize) + "]");
  }
  const auto rows = filter_members(set, corpus_, filter, sets_);
  ordered_json list = ordered_json::array();
  const std::size_t begin = std::min(rows.size(), page * page_size);
  const std::size_t end = std::min(rows.size(), begin + page_size);
  for (std::size_t i = begin; i < end; ++i) list.push_back(sentence_json(*rows[i]));
  ordered_json j;
  j["set_id"] = set.set_id;
  j["version"] = set.version;
  j["total"] = rows.size();
  j["page"] = page;
  j["page_size"] = page_size;
  j["sentences"] = std::move(list);
  return json_response(200, j);
}

HttpResponse TriageService::embedding(const ChallengeSet& set) const {
  ordered_json points = ordered_json::array();
  for (const auto& id : set.active_members()) {
    const auto& r = corpus_.at(id);
    if (!r.projection) continue;
    points.push_back({{"id", r.id},
                      {"origin", to_string(r.origin)},
                      {"x", r.projection->x},
                      {"y", r.projection->y},
                      {"source", r.source_text},
                      {"translation", r.translation_text}});
  }
  ordered_json j;
  j["set_id"] = set.set_id;
  j["points"] = std::move(points);
  j["contours"] = {{"train", contours_json(train_contours_)}, {"log", contours_json(log_contours_)}};
  return json_response(200, j);
}

HttpResponse TriageService::summary() const {
  const auto ctx = metrics_context(corpus_);
  Histogram fa_hist{}, chrf_hist{};
  double fa_sum = 0.0, chrf_sum = 0.0;
  std::size_t fa_n = 0, chrf_n = 0;
  for (const auto& r : corpus_.records()) {
    if (r.familiarity) {
      ++fa_hist[histogram_bin(*r.familiarity, ctx.familiarity_min, ctx.familiarity_max)];
      fa_sum += *r.familiarity;
      ++fa_n;
    }
    if (r.chrf) {
      ++chrf_hist[histogram_bin(*r.chrf, 0.0, 1.0)];
      chrf_sum += *r.chrf;
      ++chrf_n;
    }
  }
  std::size_t unit = 0;
  for (const auto& s : sets_) unit += s.kind == SetKind::kUnitTest;
  ordered_json j;
  j["language_pair"] = corpus_.language_pair().code();
  j["n_train"] = corpus_.n_train();
  j["n_log"] = corpus_.n_log();
  j["dropped_empty"] = corpus_.dropped_empty();
  j["set_count"] = sets_.size();
  j["unit_test_set_count"] = unit;
  j["topic_set_count"] = sets_.size() - unit;
  j["familiarity"] = {{"min", ctx.familiarity_min},
                      {"max", ctx.familiarity_max},
                      {"mean", fa_n ? ordered_json(fa_sum / static_cast<double>(fa_n)) : ordered_json(nullptr)},
                      {"histogram", fa_hist}};
  j["chrf"] = {{"mean", chrf_n ? ordered_json(chrf_sum / static_cast<double>(chrf_n)) : ordered_json(nullptr)},
               {"histogram", chrf_hist}};
  return json_response(200, j);
}

HttpResponse TriageService::post_edit(const std::string& set_id, std::string_view body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("request body must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "op" && key != "ids" && key != "name" && key != "version") {
      throw InputError("unknown field \"" + key + "\"");
    }
  }
  if (!j.contains("op") || !j.at("op").is_string()) throw InputError("field op is required");
  if (!j.contains("version") || !j.at("version").is_number_unsigned()) {
    throw InputError("field version (the set version being edited) is required");
  }
  JournalEntry entry;
  entry.set_id = set_id;
  entry.edit.op = parse_edit_op(j.at("op").get<std::string>());
  if (entry.edit.op == SetEdit::Op::kRename) {
    if (!j.contains("name") || !j.at("name").is_string()) throw InputError("field name is required for rename");
    entry.edit.name = j.at("name").get<std::string>();
  } else {
    if (!j.contains("ids") || !j.at("ids").is_array()) throw InputError("field ids is required");
    entry.edit.ids = j.at("ids").get<std::vector<std::string>>();
  }
  const auto expected = j.at("version").get<std::uint64_t>();

  std::unique_lock lock(mutex_);
  const auto it = std::find_if(sets_.begin(), sets_.end(), [&](const auto& s) { return s.set_id == set_id; });
  if (it == sets_.end()) return error_response(404, "unknown set \"" + set_id + "\"");
  if (it->version != expected) {
    ordered_json err;
    err["error"] = "version conflict";
    err["current_version"] = it->version;
    return json_response(409, err);
  }
  ChallengeSet updated = edit_set(*it, entry.edit, corpus_, sets_);
  entry.version = updated.version;
  entry.timestamp = now_rfc3339();
  // Journal first: an edit is applied only once it is durable.
  store_.append_journal(entry);
  *it = std::move(updated);
  refresh_metrics(sets_, corpus_);
  return json_response(200, set_summary_json(*it));
}

HttpResponse TriageService::export_rows(const ChallengeSet& set, const QueryParams& query,
                                        std::string_view body) const {
  QueryParams params = query;
  for (auto& kv : params_from_body(body)) params.insert(std::move(kv));
  params.erase("page");
  params.erase("page_size");
  const auto filter = parse_filter(params, sets_);
  std::size_t rows = 0;
  HttpResponse r;
  r.body = export_jsonl(set, corpus_, filter, sets_, &rows);
  r.content_type = "application/x-ndjson";
  r.headers.emplace_back("X-Row-Count", std::to_string(rows));
  r.headers.emplace_back("Content-Disposition", "attachment; filename=\"" + set.set_id + ".jsonl\"");
  return r;
}

namespace {

void install_routes(httplib::Server& http, TriageService& service) {
  auto forward = [&service](const char* method) {
    return [&service, method](const httplib::Request& req, httplib::Response& res) {
      // Only the URL query string; form bodies are not parameters here.
      httplib::Params params;
      if (const auto q = req.target.find('?'); q != std::string::npos) {
        httplib::detail::parse_query_text(req.target.substr(q + 1), params);
      }
      QueryParams query(params.begin(), params.end());
      const auto out = service.handle(method, req.path, query, req.body);
      res.status = out.status;
      for (const auto& [k, v] : out.headers) res.set_header(k, v);
      res.set_content(out.body, out.content_type);
    };
  };
  http.Get(R"(/api/.*)", forward("GET"));
  http.Post(R"(/api/.*)", forward("POST"));
}

}  // namespace

void TriageService::serve(const std::string& host, int port) {
  httplib::Server http;
  install_routes(http, *this);
  if (!http.bind_to_port(host, port)) {
    throw StageError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  std::cerr << "serving " << store_.root().string() << " on http://" << host << ":" << port << '\n';
  http.listen_after_bind();
}

int TriageService::start(const std::string& host, int port) {
  if (server_) throw InputError("server already running");
  auto server = std::make_unique<Server>();
  install_routes(server->http, *this);
  int bound = port;
  if (port == 0) {
    bound = server->http.bind_to_any_port(host);
    if (bound <= 0) throw StageError("cannot bind " + host);
  } else if (!server->http.bind_to_port(host, port)) {
    throw StageError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  server->thread = std::thread([s = server.get()] { s->http.listen_after_bind(); });
  server->http.wait_until_ready();
  server_ = std::move(server);
  return bound;
}

void TriageService::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
  server_.reset();
}

}  // namespace mtriage
