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

#include "mtriage/corpus.hpp"

namespace mtriage {

struct ChrfConfig {
  int max_order = 6;
  double beta = 2.0;
  bool remove_whitespace = true;

  void validate() const;
};

// Character n-gram F-score in [0, 1]. Precision and recall are averaged over
// the orders where at least one side has n-grams, then combined into F-beta.
// Throws InputError on an empty reference.
double chrf(std::string_view hypothesis, std::string_view reference, const ChrfConfig& config = {});

// Fills chrf for every train record; log records are left untouched.
void score_training(Corpus& corpus, const ChrfConfig& config = {});

}  // namespace mtriage
