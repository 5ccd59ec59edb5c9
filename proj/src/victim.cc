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

#include "kgleak/victim.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "kgleak/rng.h"

namespace kgleak {
namespace {

// Vocabulary for hallucinated names. Disjoint from the synthetic generator's
// vocabulary so fabricated names never collide with real labels by accident.
constexpr std::array<std::string_view, 24> kFakeFirst = {
    "Velvet", "Hollow",  "Marrow",  "Quill",   "Saffron", "Tundra",
    "Brindle", "Cobalt", "Driftwood", "Ember", "Flint",   "Gossamer",
    "Hazel",  "Ivory",   "Juniper", "Kestrel", "Lumen",   "Mistral",
    "Nettle", "Onyx",    "Pewter",  "Russet",  "Sable",   "Thistle"};
constexpr std::array<std::string_view, 16> kFakeSecond = {
    "Harbor", "Syndrome", "Protocol", "Accord", "Lattice", "Cascade",
    "Beacon", "Remedy",   "Charter",  "Vault",  "Circuit", "Meridian",
    "Parish", "Tonic",    "Spindle",  "Covenant"};

constexpr std::string_view kPlaceholder = "Not specified in relationships";

double Score(const std::set<std::string>& query, const Entity& e) {
  std::size_t label_hits = 0;
  for (const std::string& t : Tokenize(e.label.canonical)) {
    label_hits += query.count(t);
  }
  std::size_t description_hits = 0;
  for (const std::string& t : Tokenize(e.description)) {
    description_hits += query.count(t);
  }
  return 3.0 * static_cast<double>(label_hits) +
         static_cast<double>(description_hits);
}

std::string FabricateName(const KnowledgeGraph& secret,
                          const std::set<std::string>& taken, Rng& rng) {
  for (int attempt = 0;; ++attempt) {
    std::string name = std::string(kFakeFirst[rng.Index(kFakeFirst.size())]) +
                       " " +
                       std::string(kFakeSecond[rng.Index(kFakeSecond.size())]);
    if (attempt >= 32) name += " " + std::to_string(attempt);
    const std::string canonical = Canonicalize(name).canonical;
    if (!secret.HasEntity(canonical) && !taken.count(canonical)) return name;
  }
}

}  // namespace

void Validate(const RetrievalConfig& cfg) {
  if (cfg.top_k_entities < 1 || cfg.top_k_relations < 1) {
    throw std::invalid_argument("retrieval top_k values must be >= 1");
  }
}

void Validate(const NoiseConfig& cfg) {
  for (double p : {cfg.p_hallucinate_entity, cfg.p_hallucinate_edge,
                   cfg.p_drop_item, cfg.p_placeholder}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("noise probabilities must lie in [0, 1]");
    }
  }
}

std::set<std::string> Tokenize(std::string_view text) {
  std::set<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(std::move(current));
  return tokens;
}

RetrievedSubgraph Retrieve(const KnowledgeGraph& secret, std::string_view query,
                           const RetrievalConfig& cfg) {
  Validate(cfg);
  const std::set<std::string> query_tokens = Tokenize(query);

  std::map<std::string, double> score;
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [label, e] : secret.entities()) {
    const double s = Score(query_tokens, e);
    score.emplace(label, s);
    if (s > 0.0) ranked.emplace_back(s, label);
  }

  RetrievedSubgraph out;
  if (ranked.empty()) {
    out.fallback = true;
    for (const auto& [label, e] : secret.entities()) {
      if (out.ranked_entities.size() >= cfg.top_k_entities) break;
      out.ranked_entities.push_back(label);
    }
  } else {
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < ranked.size() && i < cfg.top_k_entities; ++i) {
      out.ranked_entities.push_back(ranked[i].second);
    }
  }

  const std::set<std::string> chosen(out.ranked_entities.begin(),
                                     out.ranked_entities.end());
  std::vector<std::pair<double, EdgeKey>> edges;
  for (const auto& [key, r] : secret.relations()) {
    if (chosen.count(key.first) || chosen.count(key.second)) {
      edges.emplace_back(score.at(key.first) + score.at(key.second), key);
    }
  }
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t i = 0; i < edges.size() && i < cfg.top_k_relations; ++i) {
    out.ranked_relations.push_back(edges[i].second);
  }

  for (const std::string& label : out.ranked_entities) {
    out.graph.AddEntity(*secret.FindEntity(label));
  }
  for (const EdgeKey& key : out.ranked_relations) {
    const Relation& r = *secret.FindRelation(key.first, key.second);
    // Endpoints outside the retrieved set enter as stubs.
    Relation copy = r;
    copy.source = secret.FindEntity(key.first)->label;
    copy.target = secret.FindEntity(key.second)->label;
    out.graph.AddRelation(copy);
  }
  return out;
}

std::string Render(const StructuredResponse& response) {
  std::string out = response.preamble;
  out += "\n";
  for (const EntityBlock& block : response.blocks) {
    out += "\nENTITY: " + block.name + "\n";
    out += "Description: " + block.description + "\n";
    out += "Relationships:\n";
    for (const RelationshipTriplet& t : block.relationships) {
      out += "  - Source: " + t.source + "\n";
      out += "  - Target: " + t.target + "\n";
      out += "  - Description: " + t.description + "\n";
    }
  }
  return out;
}

VictimResponse Respond(const KnowledgeGraph& secret, std::string_view query,
                       const RetrievalConfig& cfg, const NoiseConfig& noise,
                       int turn) {
  Validate(noise);
  const RetrievedSubgraph retrieved = Retrieve(secret, query, cfg);
  Rng rng{noise.rng_seed, static_cast<std::uint64_t>(turn)};

  VictimResponse out;
  out.fallback = retrieved.fallback;
  StructuredResponse& response = out.structured;

  std::map<std::string, std::size_t> block_of;
  for (const std::string& label : retrieved.ranked_entities) {
    const bool dropped = rng.Bernoulli(noise.p_drop_item);
    if (dropped) continue;
    const Entity& e = *retrieved.graph.FindEntity(label);
    block_of.emplace(label, response.blocks.size());
    response.blocks.push_back(EntityBlock{e.label.raw, e.description, {}});
  }

  // Names the narrative mentions, in first-appearance order.
  std::vector<std::string> mentioned;
  std::set<std::string> mentioned_set;
  auto mention = [&](const EntityLabel& label) {
    if (mentioned_set.insert(label.canonical).second) {
      mentioned.push_back(label.raw);
    }
  };
  for (const EntityBlock& b : response.blocks) mention(Canonicalize(b.name));

  for (const EdgeKey& key : retrieved.ranked_relations) {
    const bool dropped = rng.Bernoulli(noise.p_drop_item);
    if (dropped) continue;
    auto host = block_of.find(key.first);
    if (host == block_of.end()) host = block_of.find(key.second);
    if (host == block_of.end()) continue;
    const Relation& r = *retrieved.graph.FindRelation(key.first, key.second);
    response.blocks[host->second].relationships.push_back(
        RelationshipTriplet{r.source.raw, r.target.raw, r.description});
    mention(r.source);
    mention(r.target);
  }

  std::set<std::string> taken;
  if (rng.Bernoulli(noise.p_hallucinate_entity)) {
    const std::string name = FabricateName(secret, taken, rng);
    taken.insert(Canonicalize(name).canonical);
    out.fabricated_entities.push_back(Fabrication{
        "FAKE-" + std::to_string(out.fabricated_entities.size() + 1), name});
    response.blocks.push_back(EntityBlock{
        name, "Often brought up alongside the material discussed here.", {}});
  }

  const std::size_t real_blocks = block_of.size();
  if (rng.Bernoulli(noise.p_hallucinate_edge) && real_blocks > 0) {
    EntityBlock& host = response.blocks[rng.Index(real_blocks)];
    const std::string host_canonical = Canonicalize(host.name).canonical;
    const std::vector<std::string> neighbors = secret.Neighbors(host_canonical);
    std::vector<std::string> unrelated;
    for (const auto& [label, e] : secret.entities()) {
      if (label != host_canonical && !retrieved.graph.HasEntity(label) &&
          !std::binary_search(neighbors.begin(), neighbors.end(), label)) {
        unrelated.push_back(label);
      }
    }
    const bool fabricate = rng.Bernoulli(0.5) || unrelated.empty();
    std::string target;
    if (fabricate) {
      target = FabricateName(secret, taken, rng);
      taken.insert(Canonicalize(target).canonical);
      out.fabricated_entities.push_back(Fabrication{
          "FAKE-" + std::to_string(out.fabricated_entities.size() + 1),
          target});
    } else {
      target = secret.FindEntity(unrelated[rng.Index(unrelated.size())])->label.raw;
    }
    out.fabricated_relations.emplace_back(host_canonical,
                                          Canonicalize(target).canonical);
    host.relationships.push_back(RelationshipTriplet{
        host.name, target, "Frequently discussed together in the sources."});
  }

  if (rng.Bernoulli(noise.p_placeholder) && real_blocks > 0) {
    EntityBlock& host = response.blocks[rng.Index(real_blocks)];
    host.relationships.push_back(RelationshipTriplet{
        host.name, std::string(kPlaceholder), std::string(kPlaceholder)});
  }

  std::string preamble;
  if (retrieved.fallback) {
    preamble = "No entries closely matched the question, so general context "
               "is shown. ";
  }
  if (mentioned.empty()) {
    preamble += "The retrieved context does not contain any relevant entries.";
  } else {
    preamble += "Here is the retrieved information. The relevant entries are: ";
    for (std::size_t i = 0; i < mentioned.size(); ++i) {
      if (i > 0) preamble += ", ";
      preamble += mentioned[i];
    }
    preamble += ".";
  }
  response.preamble = std::move(preamble);
  out.text = Render(response);
  return out;
}

SimulatedVictim::SimulatedVictim(KnowledgeGraph secret,
                                 RetrievalConfig retrieval, NoiseConfig noise)
    : secret_(std::move(secret)), retrieval_(retrieval), noise_(noise) {
  if (secret_.empty()) throw std::invalid_argument("secret graph is empty");
  Validate(retrieval_);
  Validate(noise_);
}

VictimResponse SimulatedVictim::Query(std::string_view query, int turn) {
  return Respond(secret_, query, retrieval_, noise_, turn);
}

}  // namespace kgleak
