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

#ifndef KGLEAK_FILTERING_H_
#define KGLEAK_FILTERING_H_

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/extraction.h"
#include "kgleak/kg.h"

namespace kgleak {

class LlmGateway;

enum class Leniency { kStrict, kLenient };

std::string_view ToString(Leniency leniency);
Leniency ParseLeniency(std::string_view text);

struct FilterConfig {
  double hub_threshold_factor = 3.0;
  std::size_t per_turn_new_edge_spike = 10;
  Leniency leniency = Leniency::kLenient;
  // Canonical labels rejected as too generic to be graph entities.
  std::set<std::string> generic_terms = DefaultGenericTerms();
  // Canonical labels that stand for "no value" in a relationship slot.
  std::set<std::string> placeholder_terms = DefaultPlaceholderTerms();

  static std::set<std::string> DefaultGenericTerms();
  static std::set<std::string> DefaultPlaceholderTerms();
};

// Reads one term per line; blank lines and lines starting with '#' are
// skipped. Terms are canonicalized.
std::set<std::string> LoadTermList(const std::filesystem::path& path);

struct FilterStats {
  double avg_degree = 0.0;
  double hub_threshold_factor = 3.0;
  std::size_t per_turn_new_edge_spike = 10;
};

struct FilterContext {
  std::string_view response;
  const KnowledgeGraph* prior_graph = nullptr;  // the filtered graph so far
  FilterStats stats;
  Leniency leniency = Leniency::kLenient;
  const std::set<std::string>* generic_terms = nullptr;
  const std::set<std::string>* placeholder_terms = nullptr;
};

FilterContext MakeFilterContext(std::string_view response,
                                const KnowledgeGraph& prior,
                                const FilterConfig& cfg);

enum class DiscardReason {
  kGeneric,
  kPlaceholder,
  kUnsupported,
  kHallucinatedHub,
  kEndpointDiscarded,
  kModelVerdict,
};

std::string_view ToString(DiscardReason reason);

struct DiscardedItem {
  bool is_relation = false;
  std::string entity;  // canonical label when !is_relation
  EdgeKey relation;    // when is_relation
  DiscardReason reason = DiscardReason::kUnsupported;
};

struct FilterVerdicts {
  // Kept entities and relations. Every kept relation's endpoints are kept
  // entities too (either new and supported, or already in the prior graph).
  KnowledgeGraph kept;
  std::vector<DiscardedItem> discarded;
  // Set when the model-backed filter fell back to the rule-based one.
  bool downgraded = false;
  std::string downgrade_reason;
};

// Deterministic filter: prior-graph duplicates are kept unchecked; generic and
// placeholder labels are discarded; new names must appear in the response's
// evidence text; new entities whose degree and per-turn edge count both
// spike are discarded as hallucinated hubs.
FilterVerdicts FilterRuleBased(const ParsedCandidates& candidates,
                               const FilterContext& ctx);

// Model-backed filter: prior-graph duplicates are kept, the rest are judged
// through the gateway. Falls back to FilterRuleBased on gateway failure.
FilterVerdicts FilterLlm(const ParsedCandidates& candidates,
                         const FilterContext& ctx, LlmGateway& gateway);

// Prompt pieces of the model-backed filter, exposed for tests and replay.
std::string FilterSystemPrompt(Leniency leniency);
std::string FilterUserPrompt(const ParsedCandidates& candidates,
                             const FilterContext& ctx);

struct ModelVerdicts {
  std::map<std::string, bool> entities;  // canonical label -> keep
  std::map<EdgeKey, bool> relations;
};

// Parses "ENTITY: <name> -> KEEP|DISCARD" and
// "RELATIONSHIP: <src> -> <tgt> -> KEEP|DISCARD" lines.
ModelVerdicts ParseModelVerdicts(std::string_view reply);

}  // namespace kgleak

#endif  // KGLEAK_FILTERING_H_
