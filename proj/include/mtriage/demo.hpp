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

#include <cstdint>
#include <filesystem>

namespace mtriage {

// Synthetic English->Spanish corpus: everyday domains that dominate the
// training data, plus log-heavy niche topics placed in sparse regions of the
// 2D layout. Translations carry injected rule violations and word noise.
struct DemoOptions {
  std::size_t n_train = 5000;
  std::size_t n_log = 5000;
  std::size_t unfamiliar_topics = 12;  // at most 115
  std::size_t dim = 32;
  std::uint64_t seed = 7;
};

struct DemoFiles {
  std::filesystem::path train_file;
  std::filesystem::path log_file;
  std::filesystem::path embedding_file;
  std::filesystem::path coords_file;
  std::filesystem::path config_file;  // pipeline config with paths relative to its directory
};

// Writes train.jsonl, log.jsonl, embeddings.aemb, coords.jsonl and config.json
// into dir. Byte-identical output for identical options.
DemoFiles write_demo(const std::filesystem::path& dir, const DemoOptions& options = {});

}  // namespace mtriage
