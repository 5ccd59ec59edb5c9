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

#ifndef KGLEAK_PLANNER_H_
#define KGLEAK_PLANNER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "kgleak/extraction.h"
#include "kgleak/kg.h"
#include "kgleak/memory.h"
#include "kgleak/rng.h"

namespace kgleak {

struct PlannerConfig {
  double epsilon_init = 0.3;
  double epsilon_min = 0.05;
  double gamma = 0.98;
  double tau_init = 0.15;
  std::size_t window_k = 5;
  // Exploration failure override: among the last fail_window turns, if at
  // least fail_min_explores were explore turns and fewer than fail_rate of
  // them added a filtered node, exploit is forced.
  bool failure_override = true;
  double fail_rate = 0.2;
  std::size_t fail_window = 20;
  std::size_t fail_min_explores = 5;
  // Exploit target weighting.
  double lambda = 0.5;
  double beta_new = 2.0;
  double beta_old = 1.0;
};

void Validate(const PlannerConfig& cfg);

// Count-weighted share of this turn's parsed nodes and edges that were not in
// the cumulative raw graph before the turn. 0 for an empty parse.
double Novelty(const KnowledgeGraph& parsed, const KnowledgeGraph& cumulative_raw);

struct ModeDecision {
  QueryMode mode = QueryMode::kExplore;
  double epsilon_used = 0.0;
  double tau_used = 0.0;
  double n_bar = 0.0;
  bool forced_by_failure = false;
  bool z_draw = false;       // random exploration fired
  bool b_indicator = false;  // n_bar >= tau
};

// Novelty threshold scaled with the exploration probability.
double Tau(const PlannerConfig& cfg, double epsilon);

// True when the explore-success window says exploration has stalled.
bool ExplorationFailing(const QueryMemory& mem, const PlannerConfig& cfg);

// Mode from already-drawn randomness; the pure part of SelectMode.
ModeDecision DecideMode(const QueryMemory& mem, const PlannerConfig& cfg,
                        bool z_draw);

// Draws Z ~ Bernoulli(epsilon) from `rng`, then applies DecideMode.
ModeDecision SelectMode(const QueryMemory& mem, const PlannerConfig& cfg,
                        Rng& rng);

// One decay step: max(epsilon_min, epsilon * gamma).
double DecayEpsilon(const PlannerConfig& cfg, double epsilon);

// Closed form of `steps` decays from epsilon_init. Agrees with iterating
// DecayEpsilon up to rounding and is exactly reproducible from the step
// count alone.
double EpsilonAfter(const PlannerConfig& cfg, int steps);

// Advances the memory's epsilon by one decay step.
void AdvanceEpsilon(const PlannerConfig& cfg, QueryMemory& mem);

// Exploit weights for every entity of the filtered graph:
// beta * max(ln(deg + 1), 1) / (1 + lambda * freq).
std::map<std::string, double> ExploitWeights(const KnowledgeGraph& filtered,
                                             const QueryMemory& mem,
                                             const PlannerConfig& cfg);

// Samples a target proportionally to ExploitWeights. nullopt when the graph is
// empty, in which case the caller explores instead.
std::optional<std::string> SampleExploitTarget(const KnowledgeGraph& filtered,
                                               const QueryMemory& mem,
                                               const PlannerConfig& cfg,
                                               Rng& rng);

}  // namespace kgleak

#endif  // KGLEAK_PLANNER_H_
