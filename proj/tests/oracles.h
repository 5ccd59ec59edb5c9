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

// Reference implementations used to check library results. They share no
// code with the library beyond the graph container and favor the plainest
// formulation over speed.

#ifndef KGLEAK_TESTS_ORACLES_H_
#define KGLEAK_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgleak/kg.h"

namespace kgleak::testing {

// Dense power iteration over the undirected projection, written from the
// textbook definition: r' = (1 - a)/n + a * (sum_j r_j / deg_j over
// neighbors + dangling mass / n). Indexed like graph.entities(). Stops early
// once the L1 change of an iteration falls below `tol`; the default runs all
// iterations, which is converged to machine precision for small graphs.
inline std::vector<double> DensePageRank(const KnowledgeGraph& g, double a = 0.85,
                                         double tol = 0.0, int iterations = 2000) {
  std::vector<std::string> ids;
  for (const auto& [label, e] : g.entities()) ids.push_back(label);
  const std::size_t n = ids.size();
  auto index = [&](const std::string& s) {
    return static_cast<std::size_t>(
        std::lower_bound(ids.begin(), ids.end(), s) - ids.begin());
  };
  std::vector<std::vector<int>> adj(n, std::vector<int>(n, 0));
  for (const auto& [key, r] : g.relations()) {
    const std::size_t i = index(key.first);
    const std::size_t j = index(key.second);
    adj[i][j] = adj[j][i] = 1;
  }
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += adj[i][j];
  }
  std::vector<double> r(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < iterations; ++it) {
    double dangling = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (deg[j] == 0.0) dangling += r[j];
    }
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (adj[j][i]) s += r[j] / deg[j];
      }
      next[i] = (1.0 - a) / static_cast<double>(n) +
                a * (s + dangling / static_cast<double>(n));
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - r[i]);
    r = next;
    if (change < tol) break;
  }
  return r;
}

// Share of this turn's parsed nodes and edges absent from `seen`, by plain
// set membership.
inline double ReferenceNovelty(const KnowledgeGraph& parsed, const KnowledgeGraph& seen) {
  std::set<std::string> v, v_seen;
  std::set<EdgeKey> e, e_seen;
  for (const auto& [label, x] : parsed.entities()) v.insert(label);
  for (const auto& [label, x] : seen.entities()) v_seen.insert(label);
  for (const auto& [key, x] : parsed.relations()) e.insert(key);
  for (const auto& [key, x] : seen.relations()) e_seen.insert(key);
  double new_v = 0, new_e = 0;
  for (const auto& x : v) new_v += v_seen.count(x) ? 0 : 1;
  for (const auto& x : e) new_e += e_seen.count(x) ? 0 : 1;
  const double total = static_cast<double>(v.size() + e.size());
  return total == 0 ? 0.0 : (new_v + new_e) / total;
}

struct OracleMetrics {
  std::size_t node_hits = 0;
  std::size_t truth_edges_hit = 0;
  std::size_t extracted_edges_hit = 0;
  double leak_nodes = 0, leak_edges = 0, prec_nodes = 0, prec_edges = 0;
  double leak_deg = 0, leak_pr = 0;
};

// All six metrics by nested loops over label and pair lists, with edges
// matched in either direction. The PageRank importance uses the stopping rule
// of the importance table (L1 change below 1e-10, at most 200 iterations) so
// the comparison isolates the metric arithmetic from PageRank accuracy.
inline OracleMetrics BruteForceMetrics(const KnowledgeGraph& extracted,
                                       const KnowledgeGraph& truth) {
  std::vector<std::string> tv, ev;
  std::vector<EdgeKey> te, ee;
  for (const auto& [l, x] : truth.entities()) tv.push_back(l);
  for (const auto& [l, x] : extracted.entities()) ev.push_back(l);
  for (const auto& [k, x] : truth.relations()) te.push_back(k);
  for (const auto& [k, x] : extracted.relations()) ee.push_back(k);

  auto same_edge = [](const EdgeKey& a, const EdgeKey& b) {
    return a == b || (a.first == b.second && a.second == b.first);
  };
  OracleMetrics m;
  for (const auto& t : tv) {
    for (const auto& e : ev) m.node_hits += t == e ? 1 : 0;
  }
  for (const auto& t : te) {
    bool hit = false;
    for (const auto& e : ee) hit = hit || same_edge(t, e);
    m.truth_edges_hit += hit ? 1 : 0;
  }
  for (const auto& e : ee) {
    bool hit = false;
    for (const auto& t : te) hit = hit || same_edge(t, e);
    m.extracted_edges_hit += hit ? 1 : 0;
  }

  // Distinct undirected neighbors, and the dense PageRank.
  std::map<std::string, std::set<std::string>> nbrs;
  for (const auto& l : tv) nbrs[l];
  for (const auto& [a, b] : te) {
    if (a == b) {
      nbrs[a].insert(a);
      continue;
    }
    nbrs[a].insert(b);
    nbrs[b].insert(a);
  }
  const std::vector<double> pr = DensePageRank(truth, 0.85, 1e-10, 200);
  const std::set<std::string> es(ev.begin(), ev.end());
  double deg_total = 0, deg_hit = 0, pr_total = 0, pr_hit = 0;
  for (std::size_t i = 0; i < tv.size(); ++i) {
    const double d = static_cast<double>(nbrs[tv[i]].size());
    deg_total += d;
    pr_total += pr[i];
    if (es.count(tv[i])) {
      deg_hit += d;
      pr_hit += pr[i];
    }
  }
  auto pct = [](double a, double b) { return b == 0 ? 0.0 : 100.0 * a / b; };
  m.leak_nodes = pct(static_cast<double>(m.node_hits), static_cast<double>(tv.size()));
  m.leak_edges = pct(static_cast<double>(m.truth_edges_hit), static_cast<double>(te.size()));
  m.prec_nodes = pct(static_cast<double>(m.node_hits), static_cast<double>(ev.size()));
  m.prec_edges =
      pct(static_cast<double>(m.extracted_edges_hit), static_cast<double>(ee.size()));
  m.leak_deg = pct(deg_hit, deg_total);
  m.leak_pr = pct(pr_hit, pr_total);
  return m;
}

}  // namespace kgleak::testing

#endif  // KGLEAK_TESTS_ORACLES_H_
