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

#include "mtriage/topics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "mtriage/kdtree2d.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

namespace {

constexpr std::string_view kEnglishStopwords =
    "a about above after again against all am an and any are aren as at be because been before being below "
    "between both but by can cannot could couldn did didn do does doesn doing don down during each few for from "
    "further had hadn has hasn have haven having he her here hers herself him himself his how i if in into is "
    "isn it its itself just let ll me more most mustn my myself no nor not now of off on once only or other "
    "ought our ours ourselves out over own re s same shan she should shouldn so some such t than that the their "
    "theirs them themselves then there these they this those through to too under until up ve very was wasn we "
    "were weren what when where which while who whom why will with won would wouldn you your yours yourself "
    "yourselves";

bool keep_token(const std::string& token, const std::set<std::string>& stopwords) {
  if (stopwords.contains(token)) return false;
  const auto cps = utf8::decode(token);
  return cps.size() >= 2 || (cps.size() == 1 && utf8::is_cjk(cps[0]));
}

std::vector<Topic> finalize(std::vector<std::vector<std::string>> groups, const TopicConfig& config) {
  std::vector<Topic> topics;
  for (auto& g : groups) {
    if (g.size() < config.min_cluster_size) continue;
    std::sort(g.begin(), g.end());
    Topic t;
    t.member_ids = std::move(g);
    topics.push_back(std::move(t));
  }
  std::sort(topics.begin(), topics.end(), [](const Topic& a, const Topic& b) {
    if (a.member_ids.size() != b.member_ids.size()) return a.member_ids.size() > b.member_ids.size();
    return a.member_ids.front() < b.member_ids.front();
  });
  if (topics.size() > config.top_k_topics) topics.resize(config.top_k_topics);
  for (std::size_t i = 0; i < topics.size(); ++i) topics[i].topic_id = static_cast<int>(i);
  return topics;
}

}  // namespace

void TopicConfig::validate() const {
  if (sample_size == 0) throw InputError("topic sample_size must be > 0");
  if (top_k_topics == 0) throw InputError("top_k_topics must be > 0");
  if (min_cluster_size < 2) throw InputError("min_cluster_size must be >= 2");
  if (cluster_radius && !(*cluster_radius > 0.0)) throw InputError("cluster_radius must be positive");
}

std::vector<std::string> select_unfamiliar(const Corpus& corpus, const TopicConfig& config) {
  config.validate();
  std::vector<const SentenceRecord*> logs;
  for (const auto& r : corpus.records()) {
    if (!r.is_log()) continue;
    if (!r.familiarity) throw InputError("log record \"" + r.id + "\" has no familiarity score");
    logs.push_back(&r);
  }
  const std::size_t k = std::min(config.sample_size, logs.size());
  auto less = [](const SentenceRecord* a, const SentenceRecord* b) {
    if (*a->familiarity != *b->familiarity) return *a->familiarity < *b->familiarity;
    return a->id < b->id;
  };
  std::partial_sort(logs.begin(), logs.begin() + static_cast<std::ptrdiff_t>(k), logs.end(), less);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(logs[i]->id);
  return out;
}

double default_cluster_radius(const std::vector<Point2>& points, std::size_t min_cluster_size) {
  if (points.size() < 2) return 1.0;
  const std::size_t k = std::min(points.size() - 1, std::max<std::size_t>(1, min_cluster_size - 1));
  const KdTree2 tree(points);
  std::vector<double> dists(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) dists[i] = tree.kth_neighbor_distance(i, k);
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  const double radius = 2.0 * *mid;
  return radius > 0.0 ? radius : 1e-12;
}

std::vector<Topic> cluster(const std::vector<std::string>& ids, const Corpus& corpus, const TopicConfig& config) {
  config.validate();
  std::vector<std::string> sorted_ids(ids);
  std::sort(sorted_ids.begin(), sorted_ids.end());
  sorted_ids.erase(std::unique(sorted_ids.begin(), sorted_ids.end()), sorted_ids.end());
  std::vector<Point2> points;
  points.reserve(sorted_ids.size());
  for (const auto& id : sorted_ids) {
    const auto& r = corpus.at(id);
    if (!r.projection) throw InputError("record \"" + id + "\" has no projection");
    points.push_back(*r.projection);
  }
  if (points.empty()) return {};
  const double radius = config.cluster_radius.value_or(default_cluster_radius(points, config.min_cluster_size));
  const KdTree2 tree(points);

  constexpr int kUnassigned = -1;
  constexpr int kNoise = -2;
  std::vector<int> label(points.size(), kUnassigned);
  std::vector<char> expanded(points.size(), 0);
  int next_cluster = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnassigned) continue;
    const auto seeds = tree.within(points[i], radius);
    if (seeds.size() < config.min_cluster_size) {
      label[i] = kNoise;
      continue;
    }
    const int c = next_cluster++;
    label[i] = c;
    expanded[i] = 1;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (label[q] == kNoise) label[q] = c;  // border point
      if (label[q] != kUnassigned && label[q] != c) continue;
      label[q] = c;
      if (expanded[q]) continue;
      expanded[q] = 1;
      const auto nb = tree.within(points[q], radius);
      if (nb.size() >= config.min_cluster_size) {
        for (const std::size_t x : nb) {
          if (label[x] == kUnassigned || label[x] == kNoise) queue.push_back(x);
        }
      }
    }
  }
  std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(next_cluster));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] >= 0) groups[static_cast<std::size_t>(label[i])].push_back(sorted_ids[i]);
  }
  return finalize(std::move(groups), config);
}

std::vector<Topic> topics_from_assignments(const std::filesystem::path& path, const Corpus& corpus,
                                           const TopicConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::map<long long, std::vector<std::string>> by_label;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (j.is_discarded() || !j.contains("id") || !j.contains("topic") || !j["topic"].is_number_integer()) {
      throw InputError(where + ": expected {\"id\",\"topic\"}");
    }
    const auto id = j["id"].get<std::string>();
    if (!corpus.at(id).is_log()) throw InputError(where + ": \"" + id + "\" is not a log record");
    const auto topic = j["topic"].get<long long>();
    if (topic >= 0) by_label[topic].push_back(id);
  }
  std::vector<std::vector<std::string>> groups;
  for (auto& [label, members] : by_label) groups.push_back(std::move(members));
  return finalize(std::move(groups), config);
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = [] {
    std::set<std::string> out;
    std::istringstream in{std::string(kEnglishStopwords)};
    std::string w;
    while (in >> w) out.insert(w);
    return out;
  }();
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  if (path.empty()) return default_stopwords();
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stopword list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t");
    out.insert(utf8::to_lower(std::string_view(line).substr(b, e - b + 1)));
  }
  return out;
}

std::vector<std::vector<Keyword>> ctfidf(const std::vector<std::vector<std::string>>& class_documents,
                                         const std::set<std::string>& stopwords, std::size_t keyword_count,
                                         double min_score) {
  const std::size_t classes = class_documents.size();
  std::vector<std::map<std::string, std::size_t>> tf(classes);
  std::unordered_map<std::string, std::size_t> total;
  std::size_t tokens = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (const auto& doc : class_documents[c]) {
      for (auto& token : utf8::word_tokens(doc)) {
        if (!keep_token(token, stopwords)) continue;
        ++total[token];
        ++tf[c][std::move(token)];
        ++tokens;
      }
    }
  }
  const double avg = classes == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(classes);
  std::vector<std::vector<Keyword>> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& kws = out[c];
    for (const auto& [term, count] : tf[c]) {
      const double w = static_cast<double>(count) * std::log(1.0 + avg / static_cast<double>(total.at(term)));
      if (min_score > 0.0 && w < min_score) continue;
      kws.push_back({term, w});
    }
    std::sort(kws.begin(), kws.end(), [](const Keyword& a, const Keyword& b) {
      return a.score != b.score ? a.score > b.score : a.term < b.term;
    });
    if (kws.size() > keyword_count) kws.resize(keyword_count);
  }
  return out;
}

void ctfidf_keywords(std::vector<Topic>& topics, const Corpus& corpus, const TopicConfig& config) {
  const auto stopwords = load_stopwords(config.stopword_list);
  std::vector<std::vector<std::string>> docs(topics.size());
  for (std::size_t i = 0; i < topics.size(); ++i) {
    for (const auto& id : topics[i].member_ids) docs[i].push_back(corpus.at(id).source_text);
  }
  auto keywords = ctfidf(docs, stopwords, config.keyword_count, config.keyword_min_score);
  for (std::size_t i = 0; i < topics.size(); ++i) topics[i].keywords = std::move(keywords[i]);
}

std::string name_topic(const Topic& topic) {
  if (topic.keywords.empty()) return "topic-unnamed-" + std::to_string(topic.topic_id);
  std::string name = "topic-";
  const std::size_t n = std::min<std::size_t>(4, topic.keywords.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) name += '_';
    name += topic.keywords[i].term;
  }
  return name;
}

void assign_topics(Corpus& corpus, const std::vector<Topic>& topics) {
  for (auto& r : corpus.mutable_records()) r.topic_id.reset();
  for (const auto& t : topics) {
    for (const auto& id : t.member_ids) {
      const auto idx = corpus.index_of(id);
      if (!idx) throw InputError("unknown topic member \"" + id + "\"");
      corpus.mutable_records()[*idx].topic_id = t.topic_id;
    }
  }
}

}  // namespace mtriage
