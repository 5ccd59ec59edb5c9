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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgleak {

void Validate(const PlannerConfig& cfg) {
  if (!(0.0 <= cfg.epsilon_min && cfg.epsilon_min <= cfg.epsilon_init &&
        cfg.epsilon_init <= 1.0)) {
    throw std::invalid_argument("need 0 <= epsilon_min <= epsilon_init <= 1");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (!(cfg.tau_init >= 0.0)) throw std::invalid_argument("tau_init must be >= 0");
  if (cfg.window_k == 0) throw std::invalid_argument("window_k must be >= 1");
  if (!(cfg.lambda >= 0.0) || !(cfg.beta_new > 0.0) || !(cfg.beta_old > 0.0)) {
    throw std::invalid_argument("lambda must be >= 0 and betas positive");
  }
}

double Novelty(const KnowledgeGraph& parsed, const KnowledgeGraph& cumulative_raw) {
  const double nodes = static_cast<double>(parsed.num_entities());
  const double edges = static_cast<double>(parsed.num_relations());
  if (nodes + edges == 0.0) return 0.0;

  std::size_t seen_nodes = 0;
  for (const auto& [label, e] : parsed.entities()) {
    seen_nodes += cumulative_raw.HasEntity(label) ? 1 : 0;
  }
  std::size_t seen_edges = 0;
  for (const auto& [key, r] : parsed.relations()) {
    seen_edges += cumulative_raw.HasRelation(key.first, key.second) ? 1 : 0;
  }
  const double node_novelty =
      nodes == 0.0 ? 0.0 : 1.0 - static_cast<double>(seen_nodes) / nodes;
  const double edge_novelty =
      edges == 0.0 ? 0.0 : 1.0 - static_cast<double>(seen_edges) / edges;
  return (node_novelty * nodes + edge_novelty * edges) / (nodes + edges);
}

double Tau(const PlannerConfig& cfg, double epsilon) {
  if (cfg.epsilon_init == 0.0) return cfg.tau_init;
  return cfg.tau_init * (epsilon / cfg.epsilon_init);
}

bool ExplorationFailing(const QueryMemory& mem, const PlannerConfig& cfg) {
  if (!cfg.failure_override) return false;
  const auto& window = mem.explore_outcomes;
  const std::size_t span = std::min(cfg.fail_window, window.size());
  std::size_t explores = 0;
  std::size_t successes = 0;
  for (std::size_t i = window.size() - span; i < window.size(); ++i) {
    if (!window[i].was_explore) continue;
    ++explores;
    if (window[i].added_new_node) ++successes;
  }
  if (explores < cfg.fail_min_explores) return false;
  return static_cast<double>(successes) <
         cfg.fail_rate * static_cast<double>(explores);
}

ModeDecision DecideMode(const QueryMemory& mem, const PlannerConfig& cfg,
                        bool z_draw) {
  ModeDecision d;
  d.epsilon_used = mem.epsilon;
  d.tau_used = Tau(cfg, mem.epsilon);
  d.n_bar = RecentNovelty(mem, cfg.window_k);
  d.z_draw = z_draw;
  d.b_indicator = d.n_bar >= d.tau_used;
  d.mode = (!z_draw && d.b_indicator) ? QueryMode::kExploit : QueryMode::kExplore;
  if (ExplorationFailing(mem, cfg)) {
    d.forced_by_failure = true;
    d.mode = QueryMode::kExploit;
  }
  return d;
}

ModeDecision SelectMode(const QueryMemory& mem, const PlannerConfig& cfg,
                        Rng& rng) {
  return DecideMode(mem, cfg, rng.Bernoulli(mem.epsilon));
}

double DecayEpsilon(const PlannerConfig& cfg, double epsilon) {
  return std::max(cfg.epsilon_min, epsilon * cfg.gamma);
}

double EpsilonAfter(const PlannerConfig& cfg, int steps) {
  return std::max(cfg.epsilon_min, cfg.epsilon_init * std::pow(cfg.gamma, steps));
}

void AdvanceEpsilon(const PlannerConfig& cfg, QueryMemory& mem) {
  ++mem.decay_steps;
  mem.epsilon = EpsilonAfter(cfg, mem.decay_steps);
}

std::map<std::string, double> ExploitWeights(const KnowledgeGraph& filtered,
                                             const QueryMemory& mem,
                                             const PlannerConfig& cfg) {
  std::map<std::string, double> weights;
  for (const auto& [label, deg] : UndirectedDegree(filtered)) {
    double beta = cfg.beta_old;
    auto found = mem.last_discovered_turn.find(label);
    if (found != mem.last_discovered_turn.end() &&
        mem.turn - found->second < static_cast<int>(cfg.window_k)) {
      beta = cfg.beta_new;
    }
    int freq = 0;
    if (auto it = mem.freq.find(label); it != mem.freq.end()) freq = it->second;
    const double structural =
        std::max(std::log(static_cast<double>(deg) + 1.0), 1.0);
    weights.emplace(label, beta * structural / (1.0 + cfg.lambda * freq));
  }
  return weights;
}

std::optional<std::string> SampleExploitTarget(const KnowledgeGraph& filtered,
                                               const QueryMemory& mem,
                                               const PlannerConfig& cfg,
                                               Rng& rng) {
  if (filtered.empty()) return std::nullopt;
  const auto weights = ExploitWeights(filtered, mem, cfg);
  double total = 0.0;
  for (const auto& [label, w] : weights) total += w;
  double pick = rng.NextDouble() * total;
  for (const auto& [label, w] : weights) {
    if (pick < w) return label;
    pick -= w;
  }
  return weights.rbegin()->first;
}

}  // namespace kgleak
