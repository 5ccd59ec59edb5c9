// Copyright 2026 The kgleak Authors
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

#ifndef KGLEAK_SYNTHGEN_H_
#define KGLEAK_SYNTHGEN_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/kg.h"

namespace kgleak {

enum class SynthModel { kStar, kRandomPairs, kPreferential };

std::string_view ToString(SynthModel model);
// Accepts star, random_pairs (alias er) and preferential (alias ba).
SynthModel ParseSynthModel(std::string_view text);

struct SynthSpec {
  SynthModel model = SynthModel::kPreferential;
  std::size_t n_nodes = 0;
  // Ignored for star, which always has n_nodes - 1 edges.
  std::size_t n_edges = 0;
  // Entity names to draw from; generated pseudo-words when empty.
  std::vector<std::string> name_vocab;
  std::uint64_t seed = 0;
  // random_pairs only: lay a random spanning tree before the remaining edges.
  bool connected = true;
};

// Throws std::invalid_argument for infeasible specs.
void Validate(const SynthSpec& spec);

// Deterministic given the SynthSpec. Every description names its own entity and one
// neighbor, plus a topic word from SynthTopics().
KnowledgeGraph Generate(const SynthSpec& spec);

// Topic words used in generated descriptions; a natural explore seed list.
const std::vector<std::string>& SynthTopics();

}  // namespace kgleak

#endif  // KGLEAK_SYNTHGEN_H_
