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

#include <string>
#include <string_view>
#include <vector>

namespace mtriage::utf8 {

// Invalid sequences decode to U+FFFD rather than failing.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_valid(std::string_view bytes);

bool is_whitespace(char32_t cp);
bool is_emoji(char32_t cp);
// Han, Hiragana, Katakana, Hangul: scripts written without spaces between words.
bool is_cjk(char32_t cp);
// Letters and digits, approximated by excluding whitespace, punctuation, symbols and emoji.
bool is_word_char(char32_t cp);
char32_t to_lower(char32_t cp);
std::u32string to_lower(std::u32string_view text);
std::string to_lower(std::string_view text);

// Lowercased word tokens: maximal runs of word characters; CJK ideographs
// become single-character tokens.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace mtriage::utf8
