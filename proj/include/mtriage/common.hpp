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

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtriage {

// Input that violates a file schema or an operation precondition.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure inside a computation stage (degenerate data, I/O while persisting).
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct LanguagePair {
  std::string source;
  std::string target;

  std::string code() const { return source + "-" + target; }
  friend bool operator==(const LanguagePair&, const LanguagePair&) = default;
};

// Parses "en-es" / "en_es" / "en:es".
LanguagePair parse_language_pair(std::string_view text);

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// RFC 3339 with "Z" or a numeric offset; the result is normalized to UTC.
std::optional<Timestamp> parse_rfc3339(std::string_view text);
// Canonical UTC form, milliseconds printed only when non-zero.
std::string format_rfc3339(Timestamp ts);
// "YYYY-MM-DD" of the UTC day containing ts.
std::string utc_day(Timestamp ts);

// splitmix64 finalizer; used to derive independent stage seeds from one global seed.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::string_view stage, std::uint64_t index = 0);

// 64-bit FNV-1a, printed as 16 lowercase hex digits by content_hash().
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL);
std::string content_hash(std::string_view bytes);

}  // namespace mtriage
