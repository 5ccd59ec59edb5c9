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

#ifndef KGLEAK_VICTIM_H_
#define KGLEAK_VICTIM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/kg.h"

namespace kgleak {

struct RetrievalConfig {
  std::size_t top_k_entities = 10;
  std::size_t top_k_relations = 10;
};

struct NoiseConfig {
  double p_hallucinate_entity = 0.0;
  double p_hallucinate_edge = 0.0;
  double p_drop_item = 0.0;
  // Probability of a relationship whose target is an unspecified placeholder.
  double p_placeholder = 0.0;
  std::uint64_t rng_seed = 0;
};

void Validate(const RetrievalConfig& cfg);
void Validate(const NoiseConfig& cfg);

// Lowercased alphanumeric tokens.
std::set<std::string> Tokenize(std::string_view text);

struct RetrievedSubgraph {
  // Retrieved entities carry their descriptions; endpoints pulled in only by
  // a retrieved relation are present with empty descriptions.
  KnowledgeGraph graph;
  // Retrieved entities, best first. Each gets a block in the response.
  std::vector<std::string> ranked_entities;
  // Retrieved relations, best first.
  std::vector<EdgeKey> ranked_relations;
  // No query token matched anything; entities are the first by label order.
  bool fallback = false;
};

// Lexical retrieval: label-token overlap weighs 3, description-token overlap
// weighs 1; ties go to the smaller canonical label.
RetrievedSubgraph Retrieve(const KnowledgeGraph& secret, std::string_view query,
                           const RetrievalConfig& cfg);

struct RelationshipTriplet {
  std::string source;
  std::string target;
  std::string description;
};

struct EntityBlock {
  std::string name;
  std::string description;
  std::vector<RelationshipTriplet> relationships;
};

struct StructuredResponse {
  std::string preamble;
  std::vector<EntityBlock> blocks;
};

// Renders in the extraction-command grammar: preamble, blank line, then one
// block per entity separated by blank lines.
std::string Render(const StructuredResponse& response);

struct Fabrication {
  std::string oracle_id;  // FAKE-<n>; never rendered
  std::string name;
};

struct VictimResponse {
  std::string text;
  StructuredResponse structured;
  bool fallback = false;
  // Ground truth about injected noise, for test oracles and the oracle log.
  std::vector<Fabrication> fabricated_entities;
  std::vector<EdgeKey> fabricated_relations;
};

VictimResponse Respond(const KnowledgeGraph& secret, std::string_view query,
                       const RetrievalConfig& cfg, const NoiseConfig& noise,
                       int turn);

class VictimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The black-box system under attack.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual VictimResponse Query(std::string_view query, int turn) = 0;
};

class SimulatedVictim : public Victim {
 public:
  SimulatedVictim(KnowledgeGraph secret, RetrievalConfig retrieval,
                  NoiseConfig noise);
  VictimResponse Query(std::string_view query, int turn) override;

 private:
  KnowledgeGraph secret_;
  RetrievalConfig retrieval_;
  NoiseConfig noise_;
};

}  // namespace kgleak

#endif  // KGLEAK_VICTIM_H_
