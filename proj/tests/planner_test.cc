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

#include "kgleak/planner.h"

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace kgleak {
namespace {

using testing::Ent;
using testing::Graph;
using testing::Rel;

QueryMemory WithHistory(std::vector<double> history, double epsilon) {
  QueryMemory mem;
  mem.novelty_history = std::move(history);
  mem.turn = static_cast<int>(mem.novelty_history.size());
  mem.epsilon = epsilon;
  return mem;
}

TEST(NoveltyTest, AllNewAndEmpty) {
  const KnowledgeGraph parsed =
      Graph({"A", "B", "C", "D"}, {{"A", "B"}, {"C", "D"}});
  EXPECT_DOUBLE_EQ(Novelty(parsed, KnowledgeGraph{}), 1.0);
  EXPECT_DOUBLE_EQ(Novelty(KnowledgeGraph{}, parsed), 0.0);
  EXPECT_DOUBLE_EQ(Novelty(parsed, parsed), 0.0);
}

TEST(NoveltyTest, ThreeOfFourNodesNewOneOfTwoEdgesNew) {
  // A self-loop lets one seen node carry one seen edge.
  const KnowledgeGraph parsed =
      Graph({"A", "B", "C", "D"}, {{"A", "A"}, {"C", "D"}});
  const KnowledgeGraph seen = Graph({"A"}, {{"A", "A"}});
  EXPECT_NEAR(Novelty(parsed, seen), (0.75 * 4 + 0.5 * 2) / 6.0, 1e-15);
  EXPECT_NEAR(Novelty(parsed, seen), 2.0 / 3.0, 1e-15);
}

TEST(NoveltyTest, MatchesSetOracleOnRandomGraphs) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> p(0.0, 0.4);
  for (int trial = 0; trial < 500; ++trial) {
    const KnowledgeGraph parsed = testing::RandomGraph(gen, 1 + trial % 9, p(gen));
    const KnowledgeGraph seen = testing::RandomGraph(gen, trial % 12, p(gen));
    const double n = Novelty(parsed, seen);
    EXPECT_NEAR(n, testing::ReferenceNovelty(parsed, seen), 1e-12);
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 1.0);
  }
}

TEST(ModeTest, HighNoveltyWithoutDrawExploits) {
  const PlannerConfig cfg;
  const ModeDecision d = DecideMode(WithHistory({0.9}, 0.3), cfg, false);
  EXPECT_DOUBLE_EQ(d.tau_used, 0.15);
  EXPECT_TRUE(d.b_indicator);
  EXPECT_EQ(d.mode, QueryMode::kExploit);
}

TEST(ModeTest, LowNoveltyWithoutDrawExplores) {
  const PlannerConfig cfg;
  const ModeDecision d = DecideMode(WithHistory({0.01}, 0.3), cfg, false);
  EXPECT_FALSE(d.b_indicator);
  EXPECT_EQ(d.mode, QueryMode::kExplore);
}

TEST(ModeTest, ThresholdComparisonIsInclusive) {
  const PlannerConfig cfg;
  const ModeDecision d = DecideMode(WithHistory({0.15}, 0.3), cfg, false);
  EXPECT_TRUE(d.b_indicator);
  EXPECT_EQ(d.mode, QueryMode::kExploit);
}

TEST(ModeTest, PolicyTableHoldsOverSeededSimulation) {
  const PlannerConfig cfg;
  QueryMemory mem;
  mem.epsilon = cfg.epsilon_init;
  Rng rng{3, 1};
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    Rng probe = rng;
    const bool z = probe.NextDouble() < mem.epsilon;
    const ModeDecision d = SelectMode(mem, cfg, rng);
    EXPECT_EQ(d.z_draw, z);
    const double n_bar = RecentNovelty(mem, cfg.window_k);
    const double tau = cfg.tau_init * mem.epsilon / cfg.epsilon_init;
    EXPECT_NEAR(d.tau_used, tau, 1e-15);
    EXPECT_EQ(d.b_indicator, n_bar >= d.tau_used);
    QueryMode expected;
    if (d.forced_by_failure) {
      expected = QueryMode::kExploit;
    } else if (z) {
      expected = QueryMode::kExplore;
    } else {
      expected = d.b_indicator ? QueryMode::kExploit : QueryMode::kExplore;
    }
    EXPECT_EQ(d.mode, expected) << "turn " << t;
    // Novelty drifts down so both branches of b are exercised.
    const double novelty = u(gen) * std::exp(-t / 400.0);
    mem.novelty_history.push_back(novelty);
    mem.explore_outcomes.push_back({d.mode == QueryMode::kExplore, u(gen) < 0.5});
    if (mem.explore_outcomes.size() > kExploreWindow) mem.explore_outcomes.pop_front();
    ++mem.turn;
    AdvanceEpsilon(cfg, mem);
  }
}

TEST(ModeTest, RandomExplorationRateMatchesEpsilon) {
  PlannerConfig cfg;
  cfg.failure_override = false;
  const QueryMemory mem = WithHistory({0.9, 0.9, 0.9}, 0.3);
  Rng rng{42, 1};
  int explores = 0;
  for (int i = 0; i < 10000; ++i) {
    explores += SelectMode(mem, cfg, rng).mode == QueryMode::kExplore ? 1 : 0;
  }
  EXPECT_NEAR(explores / 10000.0, 0.3, 0.02);
}

TEST(ModeTest, FailureOverrideNeedsEnoughFailedExplores) {
  const PlannerConfig cfg;
  QueryMemory mem = WithHistory({0.0}, 0.3);
  // Five explore turns, none productive, inside a 20-turn window.
  for (int i = 0; i < 15; ++i) mem.explore_outcomes.push_back({false, true});
  for (int i = 0; i < 5; ++i) mem.explore_outcomes.push_back({true, false});
  EXPECT_TRUE(ExplorationFailing(mem, cfg));
  ModeDecision d = DecideMode(mem, cfg, true);
  EXPECT_TRUE(d.forced_by_failure);
  EXPECT_EQ(d.mode, QueryMode::kExploit);

  // One success in five is a 0.2 rate, which is not below 0.2.
  mem.explore_outcomes.back().added_new_node = true;
  EXPECT_FALSE(ExplorationFailing(mem, cfg));

  // Four explores are too few to judge.
  mem.explore_outcomes.clear();
  for (int i = 0; i < 4; ++i) mem.explore_outcomes.push_back({true, false});
  EXPECT_FALSE(ExplorationFailing(mem, cfg));

  PlannerConfig off = cfg;
  off.failure_override = false;
  for (int i = 0; i < 4; ++i) mem.explore_outcomes.push_back({true, false});
  EXPECT_TRUE(ExplorationFailing(mem, cfg));
  EXPECT_FALSE(ExplorationFailing(mem, off));
}

TEST(EpsilonTest, DecayExamples) {
  const PlannerConfig cfg;
  EXPECT_NEAR(DecayEpsilon(cfg, 0.3), 0.294, 1e-15);
  EXPECT_DOUBLE_EQ(DecayEpsilon(cfg, 0.0506), 0.05);
  EXPECT_DOUBLE_EQ(DecayEpsilon(cfg, 0.05), 0.05);
}

TEST(EpsilonTest, ScheduleIsMonotoneBoundedAndTauProportional) {
  for (double gamma : {0.98, 0.995}) {
    PlannerConfig cfg;
    cfg.gamma = gamma;
    QueryMemory mem;
    mem.epsilon = cfg.epsilon_init;
    double iterated = cfg.epsilon_init;
    double previous = mem.epsilon;
    for (int t = 1; t <= 1000; ++t) {
      AdvanceEpsilon(cfg, mem);
      iterated = DecayEpsilon(cfg, iterated);
      EXPECT_NEAR(mem.epsilon, iterated, 1e-12);
      EXPECT_LE(mem.epsilon, previous);
      EXPECT_GE(mem.epsilon, cfg.epsilon_min);
      EXPECT_LE(mem.epsilon, cfg.epsilon_init);
      EXPECT_NEAR(Tau(cfg, mem.epsilon) / cfg.tau_init,
                  mem.epsilon / cfg.epsilon_init, 1e-15);
      previous = mem.epsilon;
    }
    EXPECT_DOUBLE_EQ(mem.epsilon, cfg.epsilon_min);
  }
}

TEST(PlannerConfigTest, Validation) {
  PlannerConfig cfg;
  EXPECT_NO_THROW(Validate(cfg));
  cfg.epsilon_min = 0.4;
  EXPECT_THROW(Validate(cfg), std::invalid_argument);
  cfg = PlannerConfig{};
  cfg.gamma = 0.0;
  EXPECT_THROW(Validate(cfg), std::invalid_argument);
  cfg = PlannerConfig{};
  cfg.tau_init = -1;
  EXPECT_THROW(Validate(cfg), std::invalid_argument);
}

TEST(ExploitWeightTest, HandEvaluatedWeights) {
  // Hub H with seven leaves, isolated node B.
  KnowledgeGraph g;
  g.AddEntity(Ent("B"));
  for (int i = 0; i < 7; ++i) g.AddRelation(Rel("H", "L" + std::to_string(i)));
  QueryMemory mem;
  mem.freq["H"] = 1;
  const PlannerConfig cfg;  // lambda 0.5, beta_old 1
  const auto w = ExploitWeights(g, mem, cfg);
  EXPECT_NEAR(w.at("H"), std::log(8.0) / 1.5, 1e-12);
  EXPECT_NEAR(w.at("H"), 1.386, 5e-4);
  EXPECT_DOUBLE_EQ(w.at("B"), 1.0);
  EXPECT_DOUBLE_EQ(w.at("L0"), 1.0);  // ln 2 < 1, floored

  mem.freq["B"] = 100;
  EXPECT_NEAR(ExploitWeights(g, mem, cfg).at("B"), 1.0 / 51.0, 1e-15);
}

TEST(ExploitWeightTest, RecentDiscoveriesUseBetaNew) {
  KnowledgeGraph g = Graph({"A", "B"}, {});
  QueryMemory mem;
  mem.turn = 10;
  mem.last_discovered_turn = {{"A", 6}, {"B", 5}};
  const PlannerConfig cfg;  // window 5, beta_new 2
  const auto w = ExploitWeights(g, mem, cfg);
  EXPECT_DOUBLE_EQ(w.at("A"), 2.0);
  EXPECT_DOUBLE_EQ(w.at("B"), 1.0);
}

TEST(ExploitSamplerTest, FrequenciesFollowWeights) {
  KnowledgeGraph g;
  g.AddEntity(Ent("B"));
  for (int i = 0; i < 7; ++i) g.AddRelation(Rel("H", "L" + std::to_string(i)));
  QueryMemory mem;
  mem.freq["H"] = 1;
  const PlannerConfig cfg;
  Rng rng{2024, 1};
  std::map<std::string, int> hits;
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) ++hits[*SampleExploitTarget(g, mem, cfg, rng)];
  // Restricted to {H, B}: ln(8)/1.5 against 1.
  const double h = hits["H"], b = hits["B"];
  const double wh = std::log(8.0) / 1.5;
  EXPECT_NEAR(h / (h + b), wh / (wh + 1.0), 0.01);
  EXPECT_NEAR(h / (h + b), 0.581, 0.01);
  EXPECT_NEAR(b / (h + b), 0.419, 0.01);
  // Whole graph: every entity reachable in proportion to its weight.
  const double total = wh + 1.0 + 7.0;
  EXPECT_NEAR(hits["L3"] / static_cast<double>(draws), 1.0 / total, 0.005);
  EXPECT_EQ(hits.size(), g.num_entities());
}

TEST(ExploitSamplerTest, SingleAndEmptyGraphs) {
  const PlannerConfig cfg;
  Rng rng{1, 1};
  const QueryMemory mem;
  EXPECT_EQ(SampleExploitTarget(KnowledgeGraph{}, mem, cfg, rng), std::nullopt);
  const KnowledgeGraph one = Graph({"ONLY"}, {});
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(SampleExploitTarget(one, mem, cfg, rng), "ONLY");
  }
}

}  // namespace
}  // namespace kgleak
