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

#ifndef KGLEAK_EVALUATOR_H_
#define KGLEAK_EVALUATOR_H_

#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgleak/kg.h"

namespace kgleak {

struct MatchOptions {
  // When false, A->B in the extraction matches B->A in the truth.
  bool directed = false;
};

struct MatchResult {
  std::set<std::string> node_hits;
  // Truth edges that were matched, as stored in the truth graph.
  std::set<EdgeKey> edge_hits;
  // Extracted edges with a counterpart in the truth graph.
  std::size_t extracted_edges_matched = 0;
};

MatchResult MatchSets(const KnowledgeGraph& extracted,
                      const KnowledgeGraph& truth, MatchOptions opts = {});

struct MetricReport {
  int turn = 0;
  double leak_nodes = 0.0;
  double leak_edges = 0.0;
  double prec_nodes = 0.0;
  double prec_edges = 0.0;
  double leak_deg = 0.0;
  double leak_pr = 0.0;
  // Set when the extracted node (edge) set is empty and the precision is
  // reported as 0.
  bool empty_nodes = false;
  bool empty_edges = false;
};

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Leakage and precision percentages. Throws MetricError for an empty truth.
MetricReport LeakagePrecision(const KnowledgeGraph& extracted,
                              const KnowledgeGraph& truth,
                              MatchOptions opts = {});

struct ImportanceLeak {
  double leak_deg = 0.0;
  double leak_pr = 0.0;
};

// Share of total truth importance held by the matched nodes, in percent.
// Extracted nodes outside the truth contribute nothing.
ImportanceLeak ImportanceLeakage(const KnowledgeGraph& extracted,
                                 const KnowledgeGraph& truth,
                                 const ImportanceTable& table);

// Evaluator bound to one truth graph; the importance table is computed once.
class Evaluator {
 public:
  explicit Evaluator(KnowledgeGraph truth, MatchOptions opts = {});

  MetricReport Evaluate(const KnowledgeGraph& extracted, int turn) const;

  const KnowledgeGraph& truth() const { return truth_; }
  const ImportanceTable& importance() const { return table_; }

 private:
  KnowledgeGraph truth_;
  MatchOptions opts_;
  ImportanceTable table_;
};

inline constexpr char kCurvesHeader[] =
    "turn,leak_nodes,leak_edges,prec_nodes,prec_edges,leak_deg,leak_pr";

// One CSV row in the curves column order, 6 decimal places.
std::string CurvesRow(const MetricReport& r);

void WriteCurves(std::ostream& out, const std::vector<MetricReport>& rows);

}  // namespace kgleak

#endif  // KGLEAK_EVALUATOR_H_
