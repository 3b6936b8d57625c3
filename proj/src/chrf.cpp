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

#include "mtriage/chrf.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtriage/parallel.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

namespace {

std::u32string prepare(std::string_view text, bool remove_whitespace) {
  auto chars = utf8::decode(text);
  if (remove_whitespace) std::erase_if(chars, utf8::is_whitespace);
  return chars;
}

using NgramCounts = std::unordered_map<std::u32string_view, int>;

NgramCounts count_ngrams(const std::u32string& chars, std::size_t n) {
  NgramCounts counts;
  if (chars.size() < n) return counts;
  const std::u32string_view view(chars);
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[view.substr(i, n)];
  return counts;
}

}  // namespace

void ChrfConfig::validate() const {
  if (max_order < 1) throw InputError("chrF max_order must be >= 1");
  if (!(beta > 0.0)) throw InputError("chrF beta must be > 0");
}

double chrf(std::string_view hypothesis, std::string_view reference, const ChrfConfig& config) {
  config.validate();
  if (reference.empty()) throw InputError("chrF reference must be non-empty");
  const auto hyp = prepare(hypothesis, config.remove_whitespace);
  const auto ref = prepare(reference, config.remove_whitespace);

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  int retained = 0;
  for (std::size_t n = 1; n <= static_cast<std::size_t>(config.max_order); ++n) {
    const std::size_t hyp_total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    const std::size_t ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (hyp_total == 0 && ref_total == 0) continue;
    ++retained;
    if (hyp_total == 0 || ref_total == 0) continue;  // contributes P_n = R_n = 0
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    std::size_t matches = 0;
    for (const auto& [gram, count] : hyp_counts) {
      if (const auto it = ref_counts.find(gram); it != ref_counts.end()) {
        matches += static_cast<std::size_t>(std::min(count, it->second));
      }
    }
    precision_sum += static_cast<double>(matches) / static_cast<double>(hyp_total);
    recall_sum += static_cast<double>(matches) / static_cast<double>(ref_total);
  }
  if (retained == 0) return 0.0;
  const double p = precision_sum / retained;
  const double r = recall_sum / retained;
  if (p + r == 0.0) return 0.0;
  const double b2 = config.beta * config.beta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

void score_training(Corpus& corpus, const ChrfConfig& config) {
  config.validate();
  auto& records = corpus.mutable_records();
  parallel_for(records.size(), [&](std::size_t i) {
    auto& r = records[i];
    if (!r.is_train()) return;
    if (!r.reference_text) throw InputError("train record \"" + r.id + "\" has no reference");
    r.chrf = chrf(r.translation_text, *r.reference_text, config);
  });
}

}  // namespace mtriage
