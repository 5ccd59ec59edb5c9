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

#include "kgleak/synthgen.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "kgleak/prompts.h"
#include "kgleak/rng.h"
#include "kgleak/victim.h"

namespace kgleak {
namespace {

using Edge = std::pair<std::size_t, std::size_t>;

constexpr std::string_view kLinkPhrase = "linked with";

// Words of the query templates and the extraction command. Generated names
// avoid them so that lexical retrieval only matches on entity content.
const std::set<std::string>& ReservedTokens() {
  static const std::set<std::string> reserved = [] {
    std::string text(prompts::kExtractionCommand);
    text += " What are the different types of and how are they related to "
            "other concepts? Tell me everything about and all of its direct "
            "connections. What additional relationships does have beyond";
    text += " counts among ";
    text += kLinkPhrase;
    std::set<std::string> out = Tokenize(text);
    for (const std::string& topic : SynthTopics()) {
      for (const std::string& t : Tokenize(topic)) out.insert(t);
    }
    return out;
  }();
  return reserved;
}

std::vector<std::string> PseudoWords(std::size_t n, Rng& rng) {
  static constexpr std::string_view kOnsets[] = {
      "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
      "br", "dr", "kr", "st", "tr", "gl"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};
  static constexpr std::string_view kCodas[] = {"", "", "n", "r", "l", "s"};
  std::set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t syllables = 2 + rng.Index(2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.Index(std::size(kOnsets))];
      w += kVowels[rng.Index(std::size(kVowels))];
      if (s + 1 == syllables) w += kCodas[rng.Index(std::size(kCodas))];
    }
    if (ReservedTokens().count(w) || !seen.insert(w).second) continue;
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> PickNames(const SynthSpec& spec, Rng& rng) {
  if (spec.name_vocab.empty()) return PseudoWords(spec.n_nodes, rng);
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const std::string& w : spec.name_vocab) {
    const EntityLabel l = Canonicalize(w);
    if (!l.empty() && seen.insert(l.canonical).second) names.push_back(w);
  }
  if (names.size() < spec.n_nodes) {
    throw std::invalid_argument("name_vocab has fewer distinct names than nodes");
  }
  rng.Shuffle(names);
  names.resize(spec.n_nodes);
  return names;
}

std::vector<Edge> StarEdges(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
  return edges;
}

std::vector<Edge> RandomPairEdges(const SynthSpec& spec, Rng& rng) {
  const std::size_t n = spec.n_nodes;
  std::set<Edge> used;
  std::vector<Edge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a != b && used.insert({a, b}).second) edges.emplace_back(a, b);
  };
  if (spec.connected && n > 1) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.Shuffle(perm);
    for (std::size_t i = 1; i < n; ++i) add(perm[i], perm[rng.Index(i)]);
  }
  const std::size_t capacity = n * (n - 1);
  if (2 * spec.n_edges > capacity) {
    std::vector<Edge> rest;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && !used.count({a, b})) rest.emplace_back(a, b);
      }
    }
    rng.Shuffle(rest);
    for (const Edge& e : rest) {
      if (edges.size() == spec.n_edges) break;
      add(e.first, e.second);
    }
  } else {
    while (edges.size() < spec.n_edges) add(rng.Index(n), rng.Index(n));
  }
  return edges;
}

// Growth with degree-proportional attachment. Node i links to k_i distinct
// earlier nodes; k_i spreads the remaining edge budget over remaining nodes.
std::vector<Edge> PreferentialEdges(const SynthSpec& spec, Rng& rng) {
  const std::size_t n = spec.n_nodes;
  std::vector<Edge> edges;
  std::vector<std::size_t> degree(n, 0);
  std::size_t left = spec.n_edges;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t nodes_left = n - i;
    // Most edges the nodes after i can still take.
    const std::size_t cap_rest = (n - 1) * n / 2 - (i + 1) * i / 2;
    std::size_t k = (left + nodes_left - 1) / nodes_left;
    if (left > cap_rest) k = std::max(k, left - cap_rest);
    k = std::clamp<std::size_t>(k, 1, i);

    std::vector<bool> taken(i, false);
    for (std::size_t picked = 0; picked < k; ++picked) {
      double total = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        if (!taken[j]) total += static_cast<double>(degree[j]);
      }
      std::size_t choice = i;
      if (total > 0.0) {
        double u = rng.NextDouble() * total;
        for (std::size_t j = 0; j < i; ++j) {
          if (taken[j] || degree[j] == 0) continue;
          choice = j;
          if (u < static_cast<double>(degree[j])) break;
          u -= static_cast<double>(degree[j]);
        }
      } else {
        std::vector<std::size_t> free;
        for (std::size_t j = 0; j < i; ++j) {
          if (!taken[j]) free.push_back(j);
        }
        choice = free[rng.Index(free.size())];
      }
      taken[choice] = true;
      edges.emplace_back(i, choice);
      ++degree[i];
      ++degree[choice];
    }
    left -= std::min(left, k);
  }
  return edges;
}

}  // namespace

const std::vector<std::string>& SynthTopics() {
  static const std::vector<std::string> topics = {
      "minerals", "rivers",   "festivals", "engines",  "orchards", "lanterns",
      "glaciers", "harbors",  "ballads",   "textiles", "comets",   "spices"};
  return topics;
}

std::string_view ToString(SynthModel model) {
  switch (model) {
    case SynthModel::kStar:
      return "star";
    case SynthModel::kRandomPairs:
      return "random_pairs";
    case SynthModel::kPreferential:
      return "preferential";
  }
  return "unknown";
}

SynthModel ParseSynthModel(std::string_view text) {
  if (text == "star") return SynthModel::kStar;
  if (text == "random_pairs" || text == "er") return SynthModel::kRandomPairs;
  if (text == "preferential" || text == "ba") return SynthModel::kPreferential;
  throw std::invalid_argument("unknown graph model: " + std::string(text));
}

void Validate(const SynthSpec& spec) {
  const std::size_t n = spec.n_nodes;
  if (n == 0) throw std::invalid_argument("n_nodes must be positive");
  switch (spec.model) {
    case SynthModel::kStar:
      return;
    case SynthModel::kRandomPairs:
      if (spec.n_edges > n * (n - 1)) {
        throw std::invalid_argument("n_edges exceeds n_nodes * (n_nodes - 1)");
      }
      if (spec.connected && n > 1 && spec.n_edges < n - 1) {
        throw std::invalid_argument("a connected graph needs n_nodes - 1 edges");
      }
      return;
    case SynthModel::kPreferential:
      if (spec.n_edges < n - 1 || spec.n_edges > n * (n - 1) / 2) {
        throw std::invalid_argument(
            "preferential needs n_nodes - 1 <= n_edges <= n_nodes*(n_nodes-1)/2");
      }
      return;
  }
}

KnowledgeGraph Generate(const SynthSpec& spec) {
  Validate(spec);
  Rng rng{spec.seed, 0x5e17u};
  const std::vector<std::string> names = PickNames(spec, rng);

  std::vector<Edge> edges;
  switch (spec.model) {
    case SynthModel::kStar:
      edges = StarEdges(spec.n_nodes);
      break;
    case SynthModel::kRandomPairs:
      edges = RandomPairEdges(spec, rng);
      break;
    case SynthModel::kPreferential:
      edges = PreferentialEdges(spec, rng);
      break;
  }

  // Each entity's description names the first neighbor it was joined to.
  std::vector<std::size_t> mention(spec.n_nodes, spec.n_nodes);
  for (const auto& [a, b] : edges) {
    if (mention[a] == spec.n_nodes) mention[a] = b;
    if (mention[b] == spec.n_nodes) mention[b] = a;
  }

  const auto& topics = SynthTopics();
  KnowledgeGraph g;
  for (std::size_t i = 0; i < spec.n_nodes; ++i) {
    const std::string& topic = topics[rng.Index(topics.size())];
    std::string desc = names[i] + " counts among " + topic;
    if (mention[i] != spec.n_nodes) {
      desc += " " + std::string(kLinkPhrase) + " " + names[mention[i]];
    }
    desc += ".";
    g.AddEntity(Entity{Canonicalize(names[i]), desc});
  }
  for (const auto& [a, b] : edges) {
    g.AddRelation(Relation{Canonicalize(names[a]), Canonicalize(names[b]),
                           names[a] + " " + std::string(kLinkPhrase) + " " +
                               names[b]});
  }
  return g;
}

}  // namespace kgleak
