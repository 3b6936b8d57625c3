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

#include <string_view>

#include "json.hpp"
#include "mtriage/corpus.hpp"

namespace mtriage {

// Full record as stored in the artifact store and in exports. Keys follow the
// input schema ("source", "translation", ...) plus the computed fields.
nlohmann::ordered_json record_to_json(const SentenceRecord& record);
// Inverse of record_to_json; `where` prefixes error messages.
SentenceRecord record_from_json(const nlohmann::json& j, std::string_view where);

}  // namespace mtriage
