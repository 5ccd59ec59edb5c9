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

#include "kgleak/harness.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"

namespace kgleak {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Json> ReadLines(const fs::path& p) {
  std::vector<Json> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(Json::parse(line));
  return out;
}

// Counts queries and forwards them to a simulated victim.
class CountingVictim : public Victim {
 public:
  explicit CountingVictim(std::shared_ptr<Victim> inner) : inner_(std::move(inner)) {}
  VictimResponse Query(std::string_view query, int turn) override {
    ++calls;
    return inner_->Query(query, turn);
  }
  int calls = 0;

 private:
  std::shared_ptr<Victim> inner_;
};

class FailingVictim : public Victim {
 public:
  VictimResponse Query(std::string_view, int) override {
    throw VictimError("connection reset");
  }
};

RunConfig SmallConfig(const std::string& name, int budget) {
  RunConfig cfg;
  cfg.budget = budget;
  SynthSpec spec;
  spec.model = SynthModel::kPreferential;
  spec.n_nodes = 20;
  spec.n_edges = 30;
  spec.seed = 11;
  cfg.synthetic = spec;
  cfg.output_dir = testing::ScratchDir("harness_" + name);
  cfg.rng_seed = 3;
  return cfg;
}

TEST(RunConfigTest, UnknownKeysAreRejected) {
  try {
    ParseRunConfig(R"({"budget": 5, "dataset": "kg.json", "bugdet": 3})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key \"bugdet\""), std::string::npos);
  }
  EXPECT_THROW(ParseRunConfig(R"({"planner": {"epsilon": 0.3}})"), ConfigError);
  EXPECT_THROW(ParseRunConfig(R"({"victim": {"top_k": 3}})"), ConfigError);
  EXPECT_THROW(ParseRunConfig("{not json"), ConfigError);
  EXPECT_THROW(ParseRunConfig(R"({"budget": "many"})"), ConfigError);
  EXPECT_THROW(ParseRunConfig(R"({"strategy": "greedy"})"), ConfigError);
}

TEST(RunConfigTest, ValidationAndPaths) {
  RunConfig cfg = ParseRunConfig(
      R"({"budget": 7, "dataset": "data/kg.json", "output_dir": "/tmp/out",
          "domain_seeds": "seeds.txt", "strategy": "explore_only",
          "filter": "none", "planner": {"gamma": 0.99},
          "victim": {"top_k_entities": 4, "noise_seed": 9}})",
      "/base");
  EXPECT_EQ(cfg.budget, 7);
  EXPECT_EQ(cfg.dataset, fs::path("/base/data/kg.json"));
  EXPECT_EQ(cfg.domain_seeds, fs::path("/base/seeds.txt"));
  EXPECT_EQ(cfg.output_dir, fs::path("/tmp/out"));
  EXPECT_EQ(cfg.strategy, Strategy::kExploreOnly);
  EXPECT_EQ(cfg.filter, FilterKind::kNone);
  EXPECT_DOUBLE_EQ(cfg.planner.gamma, 0.99);
  EXPECT_EQ(cfg.retrieval.top_k_entities, 4u);
  EXPECT_TRUE(cfg.noise_seed_set);
  EXPECT_NO_THROW(Validate(cfg));

  // The serialized form parses back to the same config.
  const std::string text = SerializeRunConfig(cfg);
  EXPECT_EQ(SerializeRunConfig(ParseRunConfig(text)), text);

  cfg.budget = 0;
  EXPECT_THROW(Validate(cfg), ConfigError);
  cfg.budget = 1;
  cfg.dataset.clear();
  EXPECT_THROW(Validate(cfg), ConfigError);
  cfg.dataset = "kg.json";
  cfg.filter_config.hub_threshold_factor = 1.0;
  EXPECT_THROW(Validate(cfg), ConfigError);
}

TEST(RunAttackTest, SingleTurnWithNoOverlapUsesVictimFallback) {
  const fs::path dir = testing::ScratchDir("harness_fallback");
  KnowledgeGraph truth;
  truth.AddEntity(testing::Ent("ZED", "zzz"));
  truth.AddEntity(testing::Ent("QUX", "qqq"));
  truth.AddRelation(testing::Rel("ZED", "QUX", "zq"));
  SaveKnowledgeGraph(truth, dir / "kg.json");

  RunConfig cfg;
  cfg.budget = 1;
  cfg.dataset = dir / "kg.json";
  cfg.output_dir = dir / "run";
  const RunResult r = RunAttack(cfg);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.turns_done, 1);
  EXPECT_EQ(r.victim_queries, 1);
  ASSERT_EQ(r.curves.size(), 2u);
  const std::vector<Json> turns = ReadLines(cfg.output_dir / "turns.jsonl");
  ASSERT_EQ(turns.size(), 1u);
  EXPECT_EQ(turns[0]["mode"], "explore");
  EXPECT_EQ(turns[0]["victim_fallback"], true);
  EXPECT_EQ(turns[0]["topic"], "key concepts");
  // The fallback context still names both entities.
  EXPECT_EQ(r.filtered.num_entities(), 2u);
  for (const char* name : {"curves.csv", "extracted.json", "summary.json",
                           "config.json", "checkpoint.json"}) {
    EXPECT_TRUE(fs::exists(cfg.output_dir / name)) << name;
  }
}

TEST(RunAttackTest, NoiseFreeRunRecoversSmallGraph) {
  const RunConfig cfg = SmallConfig("recover", 40);
  const RunResult r = RunAttack(cfg);
  const KnowledgeGraph truth = LoadTruth(cfg);
  EXPECT_DOUBLE_EQ(r.curves.back().leak_nodes, 100.0);
  EXPECT_DOUBLE_EQ(r.curves.back().leak_edges, 100.0);
  EXPECT_DOUBLE_EQ(r.curves.back().prec_nodes, 100.0);
  EXPECT_DOUBLE_EQ(r.curves.back().prec_edges, 100.0);
  for (const auto& [label, e] : truth.entities()) EXPECT_TRUE(r.filtered.HasEntity(label));
  EXPECT_EQ(r.filtered.num_entities(), truth.num_entities());
  EXPECT_EQ(r.filtered.num_relations(), truth.num_relations());
  // Leakage never falls, since the filtered graph only grows.
  for (std::size_t i = 1; i < r.curves.size(); ++i) {
    EXPECT_GE(r.curves[i].leak_nodes, r.curves[i - 1].leak_nodes);
    EXPECT_GE(r.curves[i].leak_edges, r.curves[i - 1].leak_edges);
  }
}

TEST(RunAttackTest, SameSeedGivesIdenticalLogs) {
  RunConfig a = SmallConfig("det_a", 25);
  a.noise.p_hallucinate_entity = 0.2;
  a.noise.p_hallucinate_edge = 0.2;
  a.noise.p_drop_item = 0.1;
  RunConfig b = a;
  b.output_dir = testing::ScratchDir("harness_det_b");
  RunAttack(a);
  RunAttack(b);
  const std::string log_a = ReadAll(a.output_dir / "turns.jsonl");
  EXPECT_FALSE(log_a.empty());
  EXPECT_EQ(log_a, ReadAll(b.output_dir / "turns.jsonl"));
  EXPECT_EQ(ReadAll(a.output_dir / "curves.csv"), ReadAll(b.output_dir / "curves.csv"));

  RunConfig c = a;
  c.output_dir = testing::ScratchDir("harness_det_c");
  c.rng_seed = 4;
  RunAttack(c);
  EXPECT_NE(log_a, ReadAll(c.output_dir / "turns.jsonl"));
}

TEST(RunAttackTest, ResumeMatchesUninterruptedRun) {
  RunConfig whole = SmallConfig("resume_whole", 30);
  whole.noise.p_hallucinate_entity = 0.1;
  whole.noise.p_placeholder = 0.2;
  whole.track_raw_curves = true;
  RunAttack(whole);

  RunConfig split = whole;
  split.output_dir = testing::ScratchDir("harness_resume_split");
  RunOptions first;
  first.stop_after = 12;
  const RunResult part = RunAttack(split, first);
  EXPECT_FALSE(part.complete);
  EXPECT_EQ(part.turns_done, 12);
  EXPECT_FALSE(fs::exists(split.output_dir / "summary.json"));

  RunOptions second;
  second.resume = true;
  const RunResult rest = RunAttack(split, second);
  EXPECT_TRUE(rest.complete);
  EXPECT_EQ(rest.victim_queries, 18);
  for (const char* name : {"turns.jsonl", "curves.csv", "curves_raw.csv",
                           "extracted.json", "oracle.jsonl"}) {
    EXPECT_EQ(ReadAll(whole.output_dir / name), ReadAll(split.output_dir / name))
        << name;
  }
}

TEST(RunAttackTest, BudgetCountsVictimQueries) {
  RunConfig cfg = SmallConfig("budget", 9);
  auto counter = std::make_shared<CountingVictim>(std::make_shared<SimulatedVictim>(
      LoadTruth(cfg), cfg.retrieval, cfg.noise));
  RunOptions opts;
  opts.victim = counter;
  RunResult r = RunAttack(cfg, opts);
  EXPECT_EQ(counter->calls, 9);
  EXPECT_EQ(r.victim_queries, 9);
  EXPECT_EQ(r.curves.size(), 10u);

  cfg.seed_query = "Tell me about the main entities.";
  counter->calls = 0;
  r = RunAttack(cfg, opts);
  EXPECT_EQ(counter->calls, 10);
  const Json summary = Json::parse(ReadAll(cfg.output_dir / "summary.json"));
  EXPECT_EQ(summary["turns"], 9);
  EXPECT_EQ(summary["victim_queries"], 10);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "seed_turn.json"));
  EXPECT_EQ(ReplayRun(cfg.output_dir).total(), 0);
}

TEST(RunAttackTest, VictimFailureKeepsCheckpoint) {
  RunConfig cfg = SmallConfig("victim_fail", 5);
  RunOptions opts;
  opts.victim = std::make_shared<FailingVictim>();
  EXPECT_THROW(RunAttack(cfg, opts), RunError);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "checkpoint.json"));
}

TEST(ReplayTest, RecomputesEveryTurn) {
  RunConfig cfg = SmallConfig("replay", 30);
  cfg.noise.p_hallucinate_entity = 0.2;
  cfg.noise.p_hallucinate_edge = 0.2;
  RunAttack(cfg);
  const ReplayReport report = ReplayRun(cfg.output_dir);
  EXPECT_EQ(report.turns, 30);
  EXPECT_EQ(report.total(), 0) << (report.details.empty() ? "" : report.details[0]);

  // A tampered log is caught.
  std::vector<Json> turns = ReadLines(cfg.output_dir / "turns.jsonl");
  turns[4]["novelty"] = turns[4]["novelty"].get<double>() + 0.25;
  std::ofstream out(cfg.output_dir / "turns.jsonl", std::ios::trunc);
  for (const Json& t : turns) out << t.dump() << '\n';
  out.close();
  EXPECT_GT(ReplayRun(cfg.output_dir).novelty_mismatches, 0);
}

TEST(CompareTest, DeltasAgainstFirstRun) {
  RunConfig a = SmallConfig("cmp_a", 15);
  RunConfig b = a;
  b.output_dir = testing::ScratchDir("harness_cmp_b");
  RunConfig c = a;
  c.output_dir = testing::ScratchDir("harness_cmp_c");
  c.strategy = Strategy::kExploreOnly;
  for (const RunConfig* cfg : {&a, &b, &c}) RunAttack(*cfg);

  const std::vector<CompareRow> rows = CompareRuns({a.output_dir, b.output_dir, c.output_dir});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].delta_l_bar, 0.0);
  EXPECT_EQ(rows[1].delta_p_bar, 0.0);
  EXPECT_EQ(rows[2].strategy, "explore_only");
  EXPECT_DOUBLE_EQ(rows[2].delta_l_bar, rows[2].l_bar - rows[0].l_bar);
  EXPECT_DOUBLE_EQ(rows[0].l_bar,
                   (rows[0].final.leak_nodes + rows[0].final.leak_edges) / 2.0);

  std::ostringstream table;
  PrintCompareTable(table, rows);
  EXPECT_NE(table.str().find("leak_deg"), std::string::npos);
  EXPECT_NE(table.str().find("leak_pr"), std::string::npos);

  RunConfig other = a;
  other.output_dir = testing::ScratchDir("harness_cmp_other");
  other.synthetic->seed = 12;
  RunAttack(other);
  EXPECT_THROW(CompareRuns({a.output_dir, other.output_dir}), RunError);
}

}  // namespace
}  // namespace kgleak
