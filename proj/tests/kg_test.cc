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

#include "kgleak/kg.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace kgleak {
namespace {

using testing::Ent;
using testing::Graph;
using testing::Rel;

TEST(CanonicalizeTest, Examples) {
  EXPECT_EQ(Canonicalize("  aspirin ").canonical, "ASPIRIN");
  EXPECT_EQ(Canonicalize("**Chronic Pain**").canonical, "CHRONIC PAIN");
  EXPECT_EQ(Canonicalize("harvard   university").canonical, "HARVARD UNIVERSITY");
  EXPECT_EQ(Canonicalize("_Hydrogen_").canonical, "HYDROGEN");
  EXPECT_EQ(Canonicalize("[Entity Name]").canonical, "ENTITY NAME");
  EXPECT_EQ(Canonicalize("  aspirin ").raw, "  aspirin ");
}

TEST(CanonicalizeTest, EmptyWhenNothingSurvives) {
  EXPECT_TRUE(Canonicalize("").empty());
  EXPECT_TRUE(Canonicalize("   \t").empty());
  EXPECT_TRUE(Canonicalize("****").empty());
  EXPECT_TRUE(Canonicalize("[ ]").empty());
}

TEST(CanonicalizeTest, IdempotentAndCaseInsensitiveOnRandomText) {
  std::mt19937_64 gen(11);
  const std::string alphabet = "abcXYZ  \t*_[]()-.'019";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 24);
  for (int i = 0; i < 5000; ++i) {
    std::string raw;
    for (int k = len(gen); k > 0; --k) raw.push_back(alphabet[pick(gen)]);
    const std::string c = Canonicalize(raw).canonical;
    ASSERT_EQ(Canonicalize(c).canonical, c) << "raw=\"" << raw << "\"";
    std::string lower = raw;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    ASSERT_EQ(Canonicalize(lower).canonical, c) << "raw=\"" << raw << "\"";
    const bool has_content = std::any_of(raw.begin(), raw.end(), [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch));
    });
    if (has_content) ASSERT_FALSE(c.empty()) << "raw=\"" << raw << "\"";
  }
}

TEST(InsertTest, UnionIdempotence) {
  KnowledgeGraph g;
  g.Insert({Ent("A")}, {});
  g.Insert({Ent("A")}, {});
  EXPECT_EQ(g.num_entities(), 1u);
}

TEST(InsertTest, RelationCreatesStubs) {
  KnowledgeGraph g;
  const auto stats = g.Insert({}, {Rel("A", "B")});
  EXPECT_EQ(g.num_entities(), 2u);
  EXPECT_EQ(g.num_relations(), 1u);
  EXPECT_EQ(stats.new_relations, 1u);
  EXPECT_EQ(g.FindEntity("A")->description, "");
}

TEST(InsertTest, Dedup) {
  KnowledgeGraph g = Graph({"A", "B"}, {{"A", "B"}});
  g.Insert({Ent("B")}, {Rel("a", "b")});
  EXPECT_EQ(g.num_entities(), 2u);
  EXPECT_EQ(g.num_relations(), 1u);
}

TEST(InsertTest, LongerDescriptionWinsTieKeepsExisting) {
  KnowledgeGraph g;
  g.AddEntity(Ent("A", "short"));
  g.AddEntity(Ent("a", "a much longer text"));
  EXPECT_EQ(g.FindEntity("A")->description, "a much longer text");
  g.AddEntity(Ent("A", "same length text!!"));
  EXPECT_EQ(g.FindEntity("A")->description, "a much longer text");
}

TEST(InsertTest, EmptyLabelsRejected) {
  KnowledgeGraph g;
  const auto stats = g.Insert({Ent("**"), Ent("X")}, {Rel("", "X")});
  EXPECT_EQ(stats.rejected, 2u);
  EXPECT_EQ(g.num_entities(), 1u);
  EXPECT_EQ(g.num_relations(), 0u);
}

TEST(InsertTest, MonotoneUnderRandomInserts) {
  std::mt19937_64 gen(5);
  KnowledgeGraph g;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  for (int i = 0; i < 50; ++i) {
    g.Insert(testing::RandomGraph(gen, 8, 0.1));
    ASSERT_GE(g.num_entities(), nodes);
    ASSERT_GE(g.num_relations(), edges);
    nodes = g.num_entities();
    edges = g.num_relations();
  }
}

TEST(DegreeTest, Path) {
  const auto deg = UndirectedDegree(Graph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}));
  EXPECT_EQ(deg.at("A"), 1u);
  EXPECT_EQ(deg.at("B"), 2u);
  EXPECT_EQ(deg.at("C"), 1u);
}

TEST(DegreeTest, AntiparallelPairCountsOnce) {
  const auto deg = UndirectedDegree(Graph({"A", "B"}, {{"A", "B"}, {"B", "A"}}));
  EXPECT_EQ(deg.at("A"), 1u);
  EXPECT_EQ(deg.at("B"), 1u);
}

TEST(DegreeTest, StarAndSelfLoop) {
  KnowledgeGraph g;
  for (int i = 1; i <= 9; ++i) g.AddRelation(Rel("HUB", "L" + std::to_string(i)));
  EXPECT_EQ(UndirectedDegree(g).at("HUB"), 9u);
  g.AddRelation(Rel("HUB", "HUB"));
  EXPECT_EQ(UndirectedDegree(g).at("HUB"), 10u);
}

TEST(PageRankTest, TwoNodes) {
  const auto pr = PageRank(Graph({"A", "B"}, {{"A", "B"}}));
  EXPECT_TRUE(pr.converged);
  EXPECT_NEAR(pr.scores.at("A"), 0.5, 1e-12);
  EXPECT_NEAR(pr.scores.at("B"), 0.5, 1e-12);
}

TEST(PageRankTest, CycleIsUniform) {
  KnowledgeGraph g;
  for (int i = 0; i < 7; ++i) {
    g.AddRelation(Rel("C" + std::to_string(i), "C" + std::to_string((i + 1) % 7)));
  }
  for (const auto& [label, s] : PageRank(g).scores) {
    EXPECT_NEAR(s, 1.0 / 7.0, 1e-12) << label;
  }
}

TEST(PageRankTest, StarMatchesDenseOracle) {
  KnowledgeGraph g;
  for (int i = 1; i <= 4; ++i) g.AddRelation(Rel("HUB", "L" + std::to_string(i)));
  const auto pr = PageRank(g);
  const auto oracle = testing::DensePageRank(g, 0.85);
  std::size_t i = 0;
  for (const auto& [label, s] : pr.scores) EXPECT_NEAR(s, oracle[i++], 1e-8) << label;
}

TEST(PageRankTest, RandomGraphsMatchDenseOracleAndConserveMass) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const KnowledgeGraph g = testing::RandomGraph(gen, 12 + 3 * trial, 0.12);
    const auto pr = PageRank(g);
    ASSERT_TRUE(pr.converged);
    const auto oracle = testing::DensePageRank(g, 0.85);
    double sum = 0.0;
    std::size_t i = 0;
    for (const auto& [label, s] : pr.scores) {
      EXPECT_NEAR(s, oracle[i++], 1e-8) << "trial " << trial << " " << label;
      sum += s;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(PageRankTest, IsolatedNodesGetTeleportMassOnly) {
  KnowledgeGraph g = Graph({"A", "B", "Z"}, {{"A", "B"}});
  const auto pr = PageRank(g);
  const auto oracle = testing::DensePageRank(g, 0.85);
  EXPECT_NEAR(pr.scores.at("Z"), oracle[2], 1e-10);
  EXPECT_LT(pr.scores.at("Z"), pr.scores.at("A"));
}

TEST(PageRankTest, NonConvergenceIsFlagged) {
  KnowledgeGraph g = Graph({"A", "B", "C"}, {{"A", "B"}});
  const auto pr = PageRank(g, 0.85, 0.0, 3);
  EXPECT_FALSE(pr.converged);
  EXPECT_EQ(pr.iterations, 3);
}

TEST(SerializationTest, RoundTrip) {
  std::mt19937_64 gen(9);
  KnowledgeGraph g = testing::RandomGraph(gen, 15, 0.2);
  g.AddEntity(Ent("Quoted \"name\"", "line one\nline two"));
  const LoadResult back = ParseKnowledgeGraph(SerializeKnowledgeGraph(g));
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_EQ(back.graph, g);
}

TEST(SerializationTest, ExactFormat) {
  KnowledgeGraph g;
  g.AddRelation(Rel("Aspirin", "pain", "treats"));
  g.AddEntity(Ent("Aspirin", "a drug"));
  EXPECT_EQ(SerializeKnowledgeGraph(g),
            "{\"entities\":[{\"label\":\"Aspirin\",\"description\":\"a drug\"},"
            "{\"label\":\"pain\",\"description\":\"\"}],"
            "\"relations\":[{\"source\":\"Aspirin\",\"target\":\"pain\","
            "\"description\":\"treats\"}]}\n");
}

TEST(SerializationTest, DuplicateLabelsMergeWithWarning) {
  const LoadResult r = ParseKnowledgeGraph(
      R"({"entities":[{"label":"A","description":"x"},{"label":"a ","description":"longer"}],
          "relations":[]})");
  EXPECT_EQ(r.graph.num_entities(), 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.graph.FindEntity("A")->description, "longer");
}

TEST(SerializationTest, UnknownEndpointBecomesStub) {
  const LoadResult r = ParseKnowledgeGraph(
      R"({"entities":[{"label":"A","description":"x"}],
          "relations":[{"source":"A","target":"B","description":"r"}]})");
  EXPECT_TRUE(r.graph.HasEntity("B"));
  EXPECT_EQ(r.graph.num_relations(), 1u);
}

TEST(SerializationTest, ErrorsNameLineOrField) {
  try {
    ParseKnowledgeGraph("{\n\"entities\": [\n  {\"label\": 3}\n]}");
    FAIL() << "expected KgFormatError";
  } catch (const KgFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("entities[0].label"), std::string::npos)
        << e.what();
  }
  try {
    ParseKnowledgeGraph("{\n\"entities\": [\n  {\"label\": }\n]}");
    FAIL() << "expected KgFormatError";
  } catch (const KgFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ImportanceTest, DegreeTableMatchesDegree) {
  const KnowledgeGraph g = Graph({"A", "B", "C"}, {{"A", "B"}, {"C", "B"}});
  const ImportanceTable t = ComputeImportance(g);
  EXPECT_EQ(t.degree.at("B"), 2.0);
  EXPECT_EQ(t.degree.at("A"), 1.0);
  EXPECT_EQ(t.pagerank.size(), 3u);
}

}  // namespace
}  // namespace kgleak
