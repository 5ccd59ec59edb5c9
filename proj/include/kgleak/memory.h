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

#ifndef KGLEAK_MEMORY_H_
#define KGLEAK_MEMORY_H_

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/extraction.h"
#include "kgleak/filtering.h"
#include "kgleak/kg.h"

namespace kgleak {

enum class QueryMode { kExplore, kExploit };

std::string_view ToString(QueryMode mode);
QueryMode ParseQueryMode(std::string_view text);

inline constexpr std::size_t kRecentQueryCap = 10;
inline constexpr std::size_t kExploreWindow = 20;

struct RecentQuery {
  QueryMode mode = QueryMode::kExplore;
  std::string text;
  std::string topic;  // explore topic or exploit target
};

struct ExploreOutcome {
  bool was_explore = false;
  bool added_new_node = false;
};

struct QueryMemory {
  std::vector<double> novelty_history;
  // Exploration probability for the next turn, and how many decays produced it.
  double epsilon = 0.3;
  int decay_steps = 0;
  int turn = 0;
  // Exploit selections per canonical label.
  std::map<std::string, int> freq;
  // Turn at which a canonical label first entered the filtered graph.
  std::map<std::string, int> last_discovered_turn;
  std::deque<RecentQuery> recent_queries;        // capped at kRecentQueryCap
  std::deque<ExploreOutcome> explore_outcomes;   // capped at kExploreWindow
};

struct GraphMemories {
  KnowledgeGraph raw;
  KnowledgeGraph filtered;
};

struct AttackMemory {
  GraphMemories graphs;
  QueryMemory query;
};

struct CommitResult {
  std::size_t new_raw_entities = 0;
  std::size_t new_filtered_entities = 0;
  std::size_t new_filtered_relations = 0;
};

// Folds one turn into the memories: raw graph gains the parsed candidates,
// filtered graph gains the kept items, and the query memory records novelty,
// exploit frequency, discoveries and the explore outcome.
CommitResult CommitTurn(AttackMemory& mem, const ParsedCandidates& parsed,
                        const FilterVerdicts& verdicts, double novelty,
                        QueryMode mode, const std::string& query,
                        const std::string& topic,
                        const std::optional<std::string>& target);

// The optional seed query: updates both graphs and discovery turns (as turn 0)
// without advancing the turn counter or the novelty history.
CommitResult CommitSeed(AttackMemory& mem, const ParsedCandidates& parsed,
                        const FilterVerdicts& verdicts);

// Mean of the last min(k, turn) novelty values; 0 before any turn.
double RecentNovelty(const QueryMemory& mem, std::size_t k = 5);

// Labels that entered the filtered graph within the last `window` turns.
std::vector<std::string> RecentlyDiscovered(const QueryMemory& mem, int window);

}  // namespace kgleak

#endif  // KGLEAK_MEMORY_H_
