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

#include <string>

#include <gtest/gtest.h>

#include "test_util.h"

namespace kgleak {
namespace {

using testing::Graph;

ParsedCandidates Candidates(const KnowledgeGraph& g) { return {g, 0}; }

FilterVerdicts Keep(const KnowledgeGraph& g) {
  FilterVerdicts v;
  v.kept = g;
  return v;
}

TEST(CommitTurnTest, FirstTurnFillsBothGraphs) {
  AttackMemory mem;
  const KnowledgeGraph g = Graph({"A", "B", "C", "D", "E"}, {{"A", "B"}});
  const CommitResult r = CommitTurn(mem, Candidates(g), Keep(g), 1.0,
                                    QueryMode::kExplore, "q", "topic", std::nullopt);
  EXPECT_EQ(mem.graphs.filtered.num_entities(), 5u);
  EXPECT_EQ(mem.graphs.raw.num_entities(), 5u);
  EXPECT_EQ(mem.query.turn, 1);
  EXPECT_EQ(r.new_filtered_entities, 5u);
  EXPECT_EQ(r.new_filtered_relations, 1u);
  EXPECT_EQ(mem.query.last_discovered_turn.at("C"), 1);
  ASSERT_EQ(mem.query.explore_outcomes.size(), 1u);
  EXPECT_TRUE(mem.query.explore_outcomes.back().was_explore);
  EXPECT_TRUE(mem.query.explore_outcomes.back().added_new_node);
}

TEST(CommitTurnTest, RawTakesParsedAndFilteredTakesKept) {
  AttackMemory mem;
  const KnowledgeGraph parsed = Graph({"A", "FAKE"}, {{"A", "FAKE"}});
  const KnowledgeGraph kept = Graph({"A"}, {});
  CommitTurn(mem, Candidates(parsed), Keep(kept), 1.0, QueryMode::kExplore, "q",
             "t", std::nullopt);
  EXPECT_TRUE(mem.graphs.raw.HasEntity("FAKE"));
  EXPECT_FALSE(mem.graphs.filtered.HasEntity("FAKE"));
  EXPECT_EQ(mem.graphs.filtered.num_relations(), 0u);
}

TEST(CommitTurnTest, ExploitIncrementsFrequencyOnce) {
  AttackMemory mem;
  const KnowledgeGraph g = Graph({"A"}, {});
  CommitTurn(mem, Candidates(g), Keep(g), 0.5, QueryMode::kExploit, "q", "A",
             std::string("A"));
  EXPECT_EQ(mem.query.freq.at("A"), 1);
  CommitTurn(mem, Candidates(g), Keep(g), 0.0, QueryMode::kExplore, "q", "A",
             std::string("A"));
  EXPECT_EQ(mem.query.freq.at("A"), 1);
  CommitTurn(mem, Candidates(g), Keep(g), 0.0, QueryMode::kExploit, "q", "A",
             std::string("A"));
  EXPECT_EQ(mem.query.freq.at("A"), 2);
  // Rediscovery keeps the first discovery turn.
  EXPECT_EQ(mem.query.last_discovered_turn.at("A"), 1);
}

TEST(CommitTurnTest, WindowsAreBounded) {
  AttackMemory mem;
  for (int t = 1; t <= 25; ++t) {
    const KnowledgeGraph g = Graph({"N" + std::to_string(t)}, {});
    CommitTurn(mem, Candidates(g), Keep(g), 1.0,
               t % 2 ? QueryMode::kExplore : QueryMode::kExploit,
               "query " + std::to_string(t), "x", std::nullopt);
  }
  EXPECT_EQ(mem.query.explore_outcomes.size(), 20u);
  EXPECT_EQ(mem.query.recent_queries.size(), 10u);
  EXPECT_EQ(mem.query.recent_queries.front().text, "query 16");
  EXPECT_EQ(mem.query.recent_queries.back().text, "query 25");
  EXPECT_EQ(mem.query.novelty_history.size(), 25u);
  EXPECT_EQ(mem.query.turn, 25);
  // Turn 6 is the oldest kept outcome, an exploit turn.
  EXPECT_FALSE(mem.query.explore_outcomes.front().was_explore);
}

TEST(CommitTurnTest, RejectsNoveltyOutsideUnitInterval) {
  AttackMemory mem;
  const KnowledgeGraph g;
  EXPECT_THROW(CommitTurn(mem, Candidates(g), Keep(g), 1.5, QueryMode::kExplore,
                          "q", "t", std::nullopt),
               std::invalid_argument);
  EXPECT_EQ(mem.query.turn, 0);
}

TEST(CommitSeedTest, DoesNotCountAsATurn) {
  AttackMemory mem;
  const KnowledgeGraph g = Graph({"A", "B"}, {{"A", "B"}});
  CommitSeed(mem, Candidates(g), Keep(g));
  EXPECT_EQ(mem.query.turn, 0);
  EXPECT_TRUE(mem.query.novelty_history.empty());
  EXPECT_EQ(mem.graphs.filtered.num_entities(), 2u);
  EXPECT_EQ(mem.query.last_discovered_turn.at("A"), 0);
}

TEST(RecentNoveltyTest, Examples) {
  QueryMemory mem;
  EXPECT_EQ(RecentNovelty(mem), 0.0);
  mem.novelty_history = {1.0, 0.0};
  EXPECT_DOUBLE_EQ(RecentNovelty(mem, 5), 0.5);
  mem.novelty_history = {1.0, 1.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  EXPECT_DOUBLE_EQ(RecentNovelty(mem, 5), (0.2 + 0.4 + 0.6 + 0.8 + 1.0) / 5);
}

TEST(RecentlyDiscoveredTest, UsesTurnWindow) {
  QueryMemory mem;
  mem.turn = 10;
  mem.last_discovered_turn = {{"OLD", 3}, {"EDGE", 5}, {"NEW", 6}, {"NOW", 10}};
  EXPECT_EQ(RecentlyDiscovered(mem, 5), (std::vector<std::string>{"NEW", "NOW"}));
}

TEST(QueryModeTest, RoundTrips) {
  EXPECT_EQ(ParseQueryMode(ToString(QueryMode::kExploit)), QueryMode::kExploit);
  EXPECT_EQ(ParseQueryMode(ToString(QueryMode::kExplore)), QueryMode::kExplore);
  EXPECT_THROW(ParseQueryMode("sideways"), std::invalid_argument);
}

}  // namespace
}  // namespace kgleak
