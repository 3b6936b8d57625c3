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

#include "mtriage/record_json.hpp"

#include <cmath>
#include <string>

namespace mtriage {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json record_to_json(const SentenceRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["origin"] = std::string(to_string(r.origin));
  j["source"] = r.source_text;
  j["translation"] = r.translation_text;
  if (r.reference_text) j["reference"] = *r.reference_text;
  if (r.timestamp) j["timestamp"] = format_rfc3339(*r.timestamp);
  j["provenance"] = r.provenance;
  if (r.embedding_ref) j["embedding_ref"] = *r.embedding_ref;
  if (r.projection) {
    j["x"] = r.projection->x;
    j["y"] = r.projection->y;
  }
  if (r.chrf) j["chrf"] = *r.chrf;
  if (r.familiarity) j["familiarity"] = *r.familiarity;
  j["failed_rules"] = r.failed_rules;
  if (r.topic_id) j["topic_id"] = *r.topic_id;
  return j;
}

namespace {

std::string require_string(const json& j, const char* key, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw InputError(std::string(where) + ": missing or non-string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

std::optional<double> optional_number(const json& j, const char* key, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw InputError(std::string(where) + ": field \"" + key + "\" must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw InputError(std::string(where) + ": field \"" + key + "\" is not finite");
  return v;
}

}  // namespace

SentenceRecord record_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) throw InputError(std::string(where) + ": expected a JSON object");
  SentenceRecord r;
  r.id = require_string(j, "id", where);
  r.origin = parse_origin(require_string(j, "origin", where));
  r.source_text = require_string(j, "source", where);
  r.translation_text = require_string(j, "translation", where);
  if (j.contains("reference")) r.reference_text = require_string(j, "reference", where);
  if (j.contains("timestamp")) {
    const auto ts = parse_rfc3339(require_string(j, "timestamp", where));
    if (!ts) throw InputError(std::string(where) + ": invalid RFC 3339 timestamp");
    r.timestamp = *ts;
  }
  r.provenance = require_string(j, "provenance", where);
  if (const auto it = j.find("embedding_ref"); it != j.end()) r.embedding_ref = it->get<std::size_t>();
  const auto x = optional_number(j, "x", where);
  const auto y = optional_number(j, "y", where);
  if (x.has_value() != y.has_value()) throw InputError(std::string(where) + ": projection needs both x and y");
  if (x) r.projection = Point2{*x, *y};
  r.chrf = optional_number(j, "chrf", where);
  r.familiarity = optional_number(j, "familiarity", where);
  if (const auto it = j.find("failed_rules"); it != j.end()) {
    for (const auto& name : *it) r.failed_rules.insert(name.get<std::string>());
  }
  if (const auto it = j.find("topic_id"); it != j.end() && !it->is_null()) r.topic_id = it->get<int>();
  return r;
}

}  // namespace mtriage
