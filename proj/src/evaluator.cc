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

#include "kgleak/evaluator.h"

#include <cstdio>
#include <utility>

namespace kgleak {
namespace {

double Percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0
                  : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MatchResult MatchSets(const KnowledgeGraph& extracted,
                      const KnowledgeGraph& truth, MatchOptions opts) {
  MatchResult m;
  for (const auto& [label, e] : extracted.entities()) {
    if (truth.HasEntity(label)) m.node_hits.insert(label);
  }
  for (const auto& [key, r] : extracted.relations()) {
    const auto& [a, b] = key;
    bool matched = false;
    if (truth.HasRelation(a, b)) {
      m.edge_hits.insert(key);
      matched = true;
    }
    if (!opts.directed && truth.HasRelation(b, a)) {
      m.edge_hits.insert({b, a});
      matched = true;
    }
    if (matched) ++m.extracted_edges_matched;
  }
  return m;
}

MetricReport LeakagePrecision(const KnowledgeGraph& extracted,
                              const KnowledgeGraph& truth, MatchOptions opts) {
  if (truth.num_entities() == 0) {
    throw MetricError("truth graph is empty; metrics are undefined");
  }
  const MatchResult m = MatchSets(extracted, truth, opts);
  MetricReport r;
  r.leak_nodes = Percent(m.node_hits.size(), truth.num_entities());
  r.leak_edges = Percent(m.edge_hits.size(), truth.num_relations());
  r.prec_nodes = Percent(m.node_hits.size(), extracted.num_entities());
  r.prec_edges = Percent(m.extracted_edges_matched, extracted.num_relations());
  r.empty_nodes = extracted.num_entities() == 0;
  r.empty_edges = extracted.num_relations() == 0;
  return r;
}

ImportanceLeak ImportanceLeakage(const KnowledgeGraph& extracted,
                                 const KnowledgeGraph& truth,
                                 const ImportanceTable& table) {
  auto share = [&](const std::map<std::string, double>& weights) {
    double total = 0.0;
    double hit = 0.0;
    for (const auto& [label, w] : weights) {
      total += w;
      if (extracted.HasEntity(label) && truth.HasEntity(label)) hit += w;
    }
    return total > 0.0 ? 100.0 * hit / total : 0.0;
  };
  return ImportanceLeak{share(table.degree), share(table.pagerank)};
}

Evaluator::Evaluator(KnowledgeGraph truth, MatchOptions opts)
    : truth_(std::move(truth)), opts_(opts), table_(ComputeImportance(truth_)) {
  if (truth_.num_entities() == 0) {
    throw MetricError("truth graph is empty; metrics are undefined");
  }
}

MetricReport Evaluator::Evaluate(const KnowledgeGraph& extracted,
                                 int turn) const {
  MetricReport r = LeakagePrecision(extracted, truth_, opts_);
  const ImportanceLeak imp = ImportanceLeakage(extracted, truth_, table_);
  r.leak_deg = imp.leak_deg;
  r.leak_pr = imp.leak_pr;
  r.turn = turn;
  return r;
}

std::string CurvesRow(const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.turn,
                r.leak_nodes, r.leak_edges, r.prec_nodes, r.prec_edges,
                r.leak_deg, r.leak_pr);
  return buf;
}

void WriteCurves(std::ostream& out, const std::vector<MetricReport>& rows) {
  out << kCurvesHeader << '\n';
  for (const MetricReport& r : rows) out << CurvesRow(r) << '\n';
}

}  // namespace kgleak
