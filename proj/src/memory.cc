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

#include "kgleak/memory.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace kgleak {

std::string_view ToString(QueryMode mode) {
  return mode == QueryMode::kExplore ? "explore" : "exploit";
}

QueryMode ParseQueryMode(std::string_view text) {
  if (text == "explore") return QueryMode::kExplore;
  if (text == "exploit") return QueryMode::kExploit;
  throw std::invalid_argument("unknown query mode: " + std::string(text));
}

namespace {

CommitResult MergeGraphs(AttackMemory& mem, const ParsedCandidates& parsed,
                         const FilterVerdicts& verdicts, int turn) {
  CommitResult result;
  result.new_raw_entities = mem.graphs.raw.Insert(parsed.graph).new_entities;
  for (const auto& [label, e] : verdicts.kept.entities()) {
    if (!mem.graphs.filtered.HasEntity(label)) {
      mem.query.last_discovered_turn[label] = turn;
    }
  }
  const auto stats = mem.graphs.filtered.Insert(verdicts.kept);
  result.new_filtered_entities = stats.new_entities;
  result.new_filtered_relations = stats.new_relations;
  return result;
}

}  // namespace

CommitResult CommitTurn(AttackMemory& mem, const ParsedCandidates& parsed,
                        const FilterVerdicts& verdicts, double novelty,
                        QueryMode mode, const std::string& query,
                        const std::string& topic,
                        const std::optional<std::string>& target) {
  if (!(novelty >= 0.0 && novelty <= 1.0)) {
    throw std::invalid_argument("novelty must lie in [0, 1]");
  }
  QueryMemory& q = mem.query;
  ++q.turn;
  const CommitResult result = MergeGraphs(mem, parsed, verdicts, q.turn);

  q.novelty_history.push_back(novelty);
  if (mode == QueryMode::kExploit && target) ++q.freq[*target];

  q.recent_queries.push_back(RecentQuery{mode, query, topic});
  while (q.recent_queries.size() > kRecentQueryCap) q.recent_queries.pop_front();

  q.explore_outcomes.push_back(ExploreOutcome{
      mode == QueryMode::kExplore, result.new_filtered_entities > 0});
  while (q.explore_outcomes.size() > kExploreWindow) {
    q.explore_outcomes.pop_front();
  }
  return result;
}

CommitResult CommitSeed(AttackMemory& mem, const ParsedCandidates& parsed,
                        const FilterVerdicts& verdicts) {
  return MergeGraphs(mem, parsed, verdicts, mem.query.turn);
}

double RecentNovelty(const QueryMemory& mem, std::size_t k) {
  const auto& h = mem.novelty_history;
  const std::size_t n = std::min(k, h.size());
  if (n == 0) return 0.0;
  const double sum = std::accumulate(h.end() - static_cast<std::ptrdiff_t>(n),
                                     h.end(), 0.0);
  return sum / static_cast<double>(n);
}

std::vector<std::string> RecentlyDiscovered(const QueryMemory& mem,
                                            int window) {
  std::vector<std::string> out;
  for (const auto& [label, turn] : mem.last_discovered_turn) {
    if (mem.turn - turn < window) out.push_back(label);
  }
  return out;
}

}  // namespace kgleak
