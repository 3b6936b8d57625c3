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
#include <string>
#include <string_view>
#include <vector>

#include "mtriage/corpus.hpp"

namespace mtriage {

// Terminal punctuation expectations for one sentence type in the target language.
struct TerminalMarks {
  std::u32string required;  // every character must occur in the translation
  std::u32string terminal;  // translation must end with one of these (empty: no constraint)
};

// Per language-pair parameters of the built-in rules.
struct LanguagePack {
  LanguagePair pair;
  // Source punctuation character -> target characters accepted as its translation.
  std::map<char32_t, std::u32string> punctuation;
  TerminalMarks question;
  TerminalMarks exclamation;
  std::vector<std::string> source_ovs;
  std::vector<std::string> target_ovs;
};

// Bundled packs: en-es, en-zh.
bool has_builtin_pack(const LanguagePair& pair);
LanguagePack builtin_pack(const LanguagePair& pair);

// Reads rules/<lang>/ovs.txt for both languages and rules/<pair>/punct.map.
// Files that are absent keep the bundled defaults for that component.
LanguagePack load_rule_pack(const std::filesystem::path& dir, const LanguagePair& pair);

std::vector<std::string> parse_term_list(std::string_view text);
std::map<char32_t, std::u32string> parse_punct_map(std::string_view text);

enum class Comparison {
  kSetEquality,          // extracted items agree (set or multiset)
  kPresenceImplication,  // every source item occurs in the translation
  kAbsenceImplication,   // nothing in the source => nothing in the translation
  kTerminalPunctuation,  // source sentence type => target punctuation marks
};

std::string_view to_string(Comparison c);

struct Extractor {
  enum class Kind { kEmoji, kUrl, kNumber, kRomanNumeral, kQuestion, kExclamation, kOvs, kPunctuation, kRegex };
  Kind kind = Kind::kRegex;
  // kPunctuation: the source character counted; kRegex: an ECMAScript pattern.
  std::string pattern;
};

struct UnitTestRule {
  std::string name;
  Extractor extractor;
  Comparison comparison = Comparison::kSetEquality;
  bool multiset = false;
  std::shared_ptr<const LanguagePack> language_pack;
};

struct RuleOutcome {
  std::string record_id;
  std::string rule_name;
  bool passed = true;
  std::vector<std::string> source_matches;
  std::vector<std::string> translation_matches;
};

struct RuleOptions {
  // Compare emoji as multisets instead of sets.
  bool emoji_multiset = false;
};

// emoji, url, number, roman-numeral, question, exclamation, ovs, comma, period.
// Throws InputError for a pair without a bundled pack.
std::vector<UnitTestRule> builtin_rules(const LanguagePair& pair, const RuleOptions& options = {});
std::vector<UnitTestRule> rules_for_pack(std::shared_ptr<const LanguagePack> pack, const RuleOptions& options = {});

// Pure per-record evaluation.
RuleOutcome evaluate(const UnitTestRule& rule, std::string_view source, std::string_view translation);

// One outcome per (record, rule), record-major; updates failed_rules on the corpus.
std::vector<RuleOutcome> run_rules(Corpus& corpus, const std::vector<UnitTestRule>& rules);

bool is_valid_rule_name(std::string_view name);

}  // namespace mtriage
