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

#ifndef KGLEAK_QUERYGEN_H_
#define KGLEAK_QUERYGEN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/kg.h"
#include "kgleak/llm_gateway.h"
#include "kgleak/memory.h"
#include "kgleak/rng.h"

namespace kgleak {

inline constexpr std::size_t kNeighborListCap = 15;
inline constexpr char kDefaultTopic[] = "key concepts";

struct QueryPlan {
  QueryMode mode = QueryMode::kExplore;
  std::optional<std::string> target;  // canonical label, exploit only
  int round = 0;                      // per-target exploit round, 0 for explore
  std::string topic;                  // explore topic, or the target's label
  std::string text;
  std::string full_text;              // text + extraction command
  bool fallback = false;              // template used after a model failure
};

// Appends the extraction command after a blank line. Text that already ends
// with the command is returned unchanged. Throws std::invalid_argument on
// empty or whitespace-only text.
std::string AppendCommand(std::string_view text);

// True when `full_text` ends with the extraction command.
bool EndsWithCommand(std::string_view full_text);

// Reads one topic per line; blank lines and lines starting with '#' are
// skipped.
std::vector<std::string> LoadDomainSeeds(const std::string& path);

// Explore query for one topic.
std::string ExploreText(std::string_view topic);

using WarningSink = std::function<void(const std::string&)>;

// Template query generator. Explore topics cycle through a seeded shuffle of
// the domain seeds; the cycle state is serializable for checkpoints.
class TemplateQueryGenerator {
 public:
  TemplateQueryGenerator(std::vector<std::string> domain_seeds,
                         std::uint64_t seed, WarningSink warn = {});

  QueryPlan Explore(const QueryMemory& mem);

  // Round r = freq(target) + 1. Throws std::invalid_argument when the target
  // is not in `filtered`.
  QueryPlan Exploit(const KnowledgeGraph& filtered, const QueryMemory& mem,
                    const std::string& target) const;

  QueryPlan Generate(QueryMode mode, const KnowledgeGraph& filtered,
                     const QueryMemory& mem,
                     const std::optional<std::string>& target);

  // Seeds in their current cycle order.
  const std::vector<std::string>& order() const { return order_; }

  std::string SaveState() const;
  void LoadState(std::string_view json_text);

 private:
  void Reshuffle();

  std::vector<std::string> seeds_;
  std::vector<std::string> order_;
  std::vector<bool> used_;
  Rng rng_;
  int cycles_ = 0;
  WarningSink warn_;
};

// Explore and exploit prompt bodies filled from memory, exposed for tests.
std::string NoveltyFeedback(double n_bar);
std::string RenderExplorePrompt(const KnowledgeGraph& filtered,
                                const QueryMemory& mem,
                                const std::string& dataset_name);
std::string RenderExploitPrompt(const KnowledgeGraph& filtered,
                                const QueryMemory& mem,
                                const std::string& target);

// First non-empty line of a model reply with surrounding quotes removed.
std::string CleanModelQuery(std::string_view reply);

// Model-backed generator. Uses temperature 0.3 for explore and 0.2 for
// exploit and falls back to `templates` on gateway failure or an empty reply.
QueryPlan GenerateLlm(QueryMode mode, const KnowledgeGraph& filtered,
                      const QueryMemory& mem,
                      const std::optional<std::string>& target,
                      LlmGateway& gateway, TemplateQueryGenerator& templates,
                      const std::string& dataset_name, WarningSink warn = {});

}  // namespace kgleak

#endif  // KGLEAK_QUERYGEN_H_
