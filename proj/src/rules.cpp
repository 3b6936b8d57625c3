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

#include "mtriage/rules.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include "mtriage/parallel.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

namespace {

// Bundled term lists; rules/<lang>/ovs.txt in the source tree mirrors them.
constexpr std::string_view kOvsEn =
    "asshole\nbastard\nbitch\nbullshit\ncrap\ndamn\ndickhead\nfuck\nfucking\nmotherfucker\nshit\nslut\nwhore\n";
constexpr std::string_view kOvsEs =
    "cabrón\ncabron\ncarajo\ncoño\ngilipollas\nhijo de puta\njoder\nmierda\npendejo\nputa\nzorra\n";
constexpr std::string_view kOvsZh = "他妈的\n傻逼\n混蛋\n王八蛋\n婊子\n贱人\n狗屎\n操你\n";

constexpr std::string_view kPunctEnEs = ",\t,\n.\t.\n?\t?\n!\t!\n";
constexpr std::string_view kPunctEnZh = ",\t，,、\n.\t。.．\n?\t？?\n!\t！!\n";

std::string_view bundled_ovs(std::string_view lang) {
  if (lang == "en") return kOvsEn;
  if (lang == "es") return kOvsEs;
  if (lang == "zh") return kOvsZh;
  return {};
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cp_string(char32_t cp) {
  std::string s;
  utf8::append(s, cp);
  return s;
}

// ---------------------------------------------------------------------------
// Extractors

const std::regex& url_regex() {
  static const std::regex re(R"((?:https?://|www\.)[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]+)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

std::vector<std::string> extract_urls(std::string_view text) {
  std::vector<std::string> urls;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), url_regex()); it != std::sregex_iterator(); ++it) {
    std::string url = it->str();
    while (!url.empty() && std::string_view(".,;:!?'\")]}").find(url.back()) != std::string_view::npos) {
      url.pop_back();
    }
    if (!url.empty()) urls.push_back(std::move(url));
  }
  return urls;
}

std::string strip_urls(std::string_view text) {
  return std::regex_replace(std::string(text), url_regex(), " ");
}

std::vector<std::string> extract_emoji(std::string_view text) {
  std::vector<std::string> out;
  for (const char32_t c : utf8::decode(text)) {
    if (utf8::is_emoji(c)) out.push_back(cp_string(c));
  }
  return out;
}

std::vector<std::string> regex_matches(std::string_view text, const std::regex& re) {
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back(it->str());
  }
  return out;
}

std::vector<std::string> digit_runs(std::string_view text) {
  static const std::regex re("[0-9]+");
  return regex_matches(text, re);
}

// Grouped numbers ("1,000", "12.345.678") lose their separators; any other
// digit material is split into raw digit runs.
std::vector<std::string> canonical_numbers(std::string_view text) {
  static const std::regex re(R"([0-9]+(?:[.,][0-9]+)*)");
  static const std::regex grouped(R"([0-9]{1,3}(?:,[0-9]{3})+|[0-9]{1,3}(?:\.[0-9]{3})+)");
  std::vector<std::string> out;
  for (auto& token : regex_matches(text, re)) {
    if (std::regex_match(token, grouped)) {
      std::erase_if(token, [](char c) { return c == ',' || c == '.'; });
      out.push_back(std::move(token));
    } else {
      for (auto& run : digit_runs(token)) out.push_back(std::move(run));
    }
  }
  return out;
}

std::vector<std::string> extract_roman(std::string_view text) {
  static const std::regex re(R"(\b[IVXLCDM]{2,}\b)");
  return regex_matches(text, re);
}

// Last character that is not whitespace or a closing quote/bracket.
std::optional<char32_t> final_mark(const std::u32string& chars) {
  static constexpr std::u32string_view kClosers = U"\"'”’»」』)]】）";
  for (auto it = chars.rbegin(); it != chars.rend(); ++it) {
    if (utf8::is_whitespace(*it) || kClosers.find(*it) != std::u32string_view::npos) continue;
    return *it;
  }
  return std::nullopt;
}

std::vector<std::size_t> find_term(const std::u32string& haystack, const std::u32string& term) {
  std::vector<std::size_t> hits;
  if (term.empty()) return hits;
  const bool check_left = !utf8::is_cjk(term.front());
  const bool check_right = !utf8::is_cjk(term.back());
  for (std::size_t pos = haystack.find(term); pos != std::u32string::npos; pos = haystack.find(term, pos + 1)) {
    const bool left_ok = !check_left || pos == 0 || !utf8::is_word_char(haystack[pos - 1]);
    const std::size_t end = pos + term.size();
    const bool right_ok = !check_right || end == haystack.size() || !utf8::is_word_char(haystack[end]);
    if (left_ok && right_ok) hits.push_back(pos);
  }
  return hits;
}

std::vector<std::string> extract_terms(std::string_view text, const std::vector<std::string>& terms) {
  const auto lowered = utf8::to_lower(utf8::decode(text));
  std::vector<std::string> out;
  for (const auto& term : terms) {
    const auto needle = utf8::to_lower(utf8::decode(term));
    for (std::size_t i = 0, n = find_term(lowered, needle).size(); i < n; ++i) out.push_back(term);
  }
  return out;
}

// Occurrences of `marks` outside URLs and not between two digits.
std::vector<std::string> extract_punctuation(std::string_view text, std::u32string_view marks) {
  const auto chars = utf8::decode(strip_urls(text));
  auto is_digit = [](char32_t c) { return c >= '0' && c <= '9'; };
  std::vector<std::string> out;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (marks.find(chars[i]) == std::u32string_view::npos) continue;
    if (i > 0 && i + 1 < chars.size() && is_digit(chars[i - 1]) && is_digit(chars[i + 1])) continue;
    out.push_back(cp_string(chars[i]));
  }
  return out;
}

bool same_items(std::vector<std::string> a, std::vector<std::string> b, bool multiset) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (!multiset) {
    a.erase(std::unique(a.begin(), a.end()), a.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  return a == b;
}

const LanguagePack& pack_of(const UnitTestRule& rule) {
  if (!rule.language_pack) throw InputError("rule \"" + rule.name + "\" needs a language pack");
  return *rule.language_pack;
}

RuleOutcome evaluate_terminal(const UnitTestRule& rule, char32_t source_mark, std::string_view source,
                              std::string_view translation) {
  const auto& pack = pack_of(rule);
  const TerminalMarks& marks = source_mark == U'?' ? pack.question : pack.exclamation;
  RuleOutcome out;
  const auto src = utf8::decode(source);
  const auto last = final_mark(src);
  const bool applies = last && (*last == source_mark || *last == source_mark + 0xFEE0);  // ASCII or fullwidth
  if (!applies) return out;
  out.source_matches.push_back(cp_string(*last));
  const auto tgt = utf8::decode(translation);
  for (const char32_t c : tgt) {
    const bool relevant = marks.required.find(c) != std::u32string::npos ||
                          marks.terminal.find(c) != std::u32string::npos;
    if (relevant) out.translation_matches.push_back(cp_string(c));
  }
  bool ok = true;
  for (const char32_t c : marks.required) ok = ok && tgt.find(c) != std::u32string::npos;
  std::u32string terminal = marks.terminal;
  if (marks.required.empty() && terminal.empty()) {
    // Pack without explicit expectations: the mapped mark must end the translation.
    if (const auto it = pack.punctuation.find(source_mark); it != pack.punctuation.end()) terminal = it->second;
    else terminal = std::u32string(1, source_mark);
  }
  if (!terminal.empty()) {
    const auto tlast = final_mark(tgt);
    ok = ok && tlast && terminal.find(*tlast) != std::u32string::npos;
  }
  out.passed = ok;
  return out;
}

}  // namespace

std::vector<std::string> parse_term_list(std::string_view text) {
  std::vector<std::string> terms;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t");
    terms.push_back(line.substr(begin, end - begin + 1));
  }
  return terms;
}

std::map<char32_t, std::u32string> parse_punct_map(std::string_view text) {
  std::map<char32_t, std::u32string> map;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("punct.map:" + std::to_string(line_no) + ": expected a tab");
    const auto key = utf8::decode(line.substr(0, tab));
    const auto targets = utf8::decode(line.substr(tab + 1));
    if (key.size() != 1 || targets.empty()) {
      throw InputError("punct.map:" + std::to_string(line_no) + ": expected one source character and targets");
    }
    map[key.front()] = targets;
  }
  return map;
}

bool has_builtin_pack(const LanguagePair& pair) {
  return pair.source == "en" && (pair.target == "es" || pair.target == "zh");
}

LanguagePack builtin_pack(const LanguagePair& pair) {
  if (!has_builtin_pack(pair)) throw InputError("no bundled rule pack for language pair " + pair.code());
  LanguagePack pack;
  pack.pair = pair;
  pack.source_ovs = parse_term_list(bundled_ovs(pair.source));
  pack.target_ovs = parse_term_list(bundled_ovs(pair.target));
  if (pair.target == "es") {
    pack.punctuation = parse_punct_map(kPunctEnEs);
    pack.question = {U"¿?", U""};
    pack.exclamation = {U"¡!", U""};
  } else {
    pack.punctuation = parse_punct_map(kPunctEnZh);
    pack.question = {U"", U"？"};
    pack.exclamation = {U"", U"！"};
  }
  return pack;
}

LanguagePack load_rule_pack(const std::filesystem::path& dir, const LanguagePair& pair) {
  LanguagePack pack;
  if (has_builtin_pack(pair)) {
    pack = builtin_pack(pair);
  } else {
    pack.pair = pair;
    pack.source_ovs = parse_term_list(bundled_ovs(pair.source));
    pack.target_ovs = parse_term_list(bundled_ovs(pair.target));
  }
  if (const auto text = read_file(dir / pair.source / "ovs.txt")) pack.source_ovs = parse_term_list(*text);
  if (const auto text = read_file(dir / pair.target / "ovs.txt")) pack.target_ovs = parse_term_list(*text);
  if (const auto text = read_file(dir / pair.code() / "punct.map")) pack.punctuation = parse_punct_map(*text);
  if (pack.punctuation.empty()) {
    throw InputError("rule pack " + dir.string() + " has no punct.map for " + pair.code());
  }
  return pack;
}

std::string_view to_string(Comparison c) {
  switch (c) {
    case Comparison::kSetEquality: return "set-equality";
    case Comparison::kPresenceImplication: return "presence-implication";
    case Comparison::kAbsenceImplication: return "absence-implication";
    case Comparison::kTerminalPunctuation: return "terminal-punctuation";
  }
  return "unknown";
}

bool is_valid_rule_name(std::string_view name) {
  if (name.empty() || name.front() == '-' || name.back() == '-') return false;
  char prev = 0;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    if (!ok || (c == '-' && prev == '-')) return false;
    prev = c;
  }
  return true;
}

std::vector<UnitTestRule> rules_for_pack(std::shared_ptr<const LanguagePack> pack, const RuleOptions& options) {
  using K = Extractor::Kind;
  std::vector<UnitTestRule> rules;
  auto add = [&](std::string name, K kind, Comparison cmp, bool multiset, std::string pattern = {}) {
    rules.push_back({std::move(name), {kind, std::move(pattern)}, cmp, multiset, pack});
  };
  add("emoji", K::kEmoji, Comparison::kSetEquality, options.emoji_multiset);
  add("url", K::kUrl, Comparison::kPresenceImplication, false);
  add("number", K::kNumber, Comparison::kSetEquality, true);
  add("roman-numeral", K::kRomanNumeral, Comparison::kPresenceImplication, false);
  add("question", K::kQuestion, Comparison::kTerminalPunctuation, false);
  add("exclamation", K::kExclamation, Comparison::kTerminalPunctuation, false);
  if (pack->target_ovs.empty()) {
    std::cerr << "warning: empty OVS list for '" << pack->pair.target << "'; ovs rule disabled\n";
  } else {
    add("ovs", K::kOvs, Comparison::kAbsenceImplication, false);
  }
  if (pack->punctuation.contains(U',')) add("comma", K::kPunctuation, Comparison::kSetEquality, true, ",");
  if (pack->punctuation.contains(U'.')) add("period", K::kPunctuation, Comparison::kSetEquality, true, ".");
  return rules;
}

std::vector<UnitTestRule> builtin_rules(const LanguagePair& pair, const RuleOptions& options) {
  return rules_for_pack(std::make_shared<const LanguagePack>(builtin_pack(pair)), options);
}

RuleOutcome evaluate(const UnitTestRule& rule, std::string_view source, std::string_view translation) {
  using K = Extractor::Kind;
  RuleOutcome out;
  out.rule_name = rule.name;
  switch (rule.extractor.kind) {
    case K::kEmoji:
      out.source_matches = extract_emoji(source);
      out.translation_matches = extract_emoji(translation);
      break;
    case K::kUrl:
      out.source_matches = extract_urls(source);
      out.translation_matches = extract_urls(translation);
      break;
    case K::kNumber: {
      out.source_matches = digit_runs(source);
      out.translation_matches = digit_runs(translation);
      if (same_items(out.source_matches, out.translation_matches, true)) return out;
      out.source_matches = canonical_numbers(source);
      out.translation_matches = canonical_numbers(translation);
      break;
    }
    case K::kRomanNumeral:
      out.source_matches = extract_roman(source);
      out.translation_matches = extract_roman(translation);
      break;
    case K::kQuestion:
    case K::kExclamation: {
      auto terminal = evaluate_terminal(rule, rule.extractor.kind == K::kQuestion ? U'?' : U'!', source, translation);
      terminal.rule_name = rule.name;
      return terminal;
    }
    case K::kOvs: {
      const auto& pack = pack_of(rule);
      out.source_matches = extract_terms(source, pack.source_ovs);
      out.translation_matches = extract_terms(translation, pack.target_ovs);
      break;
    }
    case K::kPunctuation: {
      const auto& pack = pack_of(rule);
      const auto key = utf8::decode(rule.extractor.pattern);
      if (key.size() != 1) throw InputError("rule \"" + rule.name + "\": punctuation pattern must be one character");
      const auto it = pack.punctuation.find(key.front());
      const std::u32string targets = it == pack.punctuation.end() ? key : it->second;
      // Every accepted target mark stands for the source mark, so equal counts
      // are multiset equality after mapping.
      out.source_matches = extract_punctuation(source, key);
      out.translation_matches = extract_punctuation(translation, targets);
      out.passed = out.source_matches.size() == out.translation_matches.size();
      return out;
    }
    case K::kRegex: {
      const std::regex re(rule.extractor.pattern);
      out.source_matches = regex_matches(source, re);
      out.translation_matches = regex_matches(translation, re);
      break;
    }
  }
  switch (rule.comparison) {
    case Comparison::kSetEquality:
      out.passed = same_items(out.source_matches, out.translation_matches, rule.multiset);
      break;
    case Comparison::kPresenceImplication: {
      if (rule.extractor.kind == K::kUrl) {
        out.passed = std::all_of(out.source_matches.begin(), out.source_matches.end(),
                                 [&](const std::string& url) { return translation.find(url) != std::string_view::npos; });
      } else {
        const std::set<std::string> present(out.translation_matches.begin(), out.translation_matches.end());
        out.passed = std::all_of(out.source_matches.begin(), out.source_matches.end(),
                                 [&](const std::string& m) { return present.contains(m); });
      }
      break;
    }
    case Comparison::kAbsenceImplication:
      out.passed = !out.source_matches.empty() || out.translation_matches.empty();
      break;
    case Comparison::kTerminalPunctuation:
      throw InputError("rule \"" + rule.name + "\": terminal-punctuation needs a question/exclamation extractor");
  }
  return out;
}

std::vector<RuleOutcome> run_rules(Corpus& corpus, const std::vector<UnitTestRule>& rules) {
  std::set<std::string> names;
  for (const auto& rule : rules) {
    if (!is_valid_rule_name(rule.name)) throw InputError("invalid rule name \"" + rule.name + "\"");
    if (!names.insert(rule.name).second) throw InputError("duplicate rule name \"" + rule.name + "\"");
    if (rule.language_pack && !(rule.language_pack->pair == corpus.language_pair())) {
      throw InputError("rule \"" + rule.name + "\" uses the " + rule.language_pack->pair.code() +
                       " pack but the corpus is " + corpus.language_pair().code());
    }
  }
  auto& records = corpus.mutable_records();
  std::vector<RuleOutcome> outcomes(records.size() * rules.size());
  parallel_for(records.size(), [&](std::size_t i) {
    auto& record = records[i];
    for (std::size_t k = 0; k < rules.size(); ++k) {
      auto outcome = evaluate(rules[k], record.source_text, record.translation_text);
      outcome.record_id = record.id;
      if (outcome.passed) record.failed_rules.erase(rules[k].name);
      else record.failed_rules.insert(rules[k].name);
      outcomes[i * rules.size() + k] = std::move(outcome);
    }
  });
  return outcomes;
}

}  // namespace mtriage
