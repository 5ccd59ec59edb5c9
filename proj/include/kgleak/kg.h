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

#ifndef KGLEAK_KG_H_
#define KGLEAK_KG_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgleak {

// An entity name as it was seen, plus the identity it is stored under.
// The canonical form is uppercased, whitespace-collapsed and stripped of
// markdown emphasis and enclosing brackets. An empty canonical form marks a
// label that must be rejected.
struct EntityLabel {
  std::string raw;
  std::string canonical;

  bool empty() const { return canonical.empty(); }
  friend bool operator==(const EntityLabel& a, const EntityLabel& b) {
    return a.canonical == b.canonical;
  }
};

EntityLabel Canonicalize(std::string_view raw);

// Canonicalizes free text (uppercase, collapsed whitespace, no '*'), used for
// verbatim-support checks against labels.
std::string CanonicalText(std::string_view text);

struct Entity {
  EntityLabel label;
  std::string description;
};

struct Relation {
  EntityLabel source;
  EntityLabel target;
  std::string description;
};

// Directed canonical (source, target) pair.
using EdgeKey = std::pair<std::string, std::string>;

// Labeled directed graph keyed by canonical identity. Entities and relations
// are kept in canonical order so that iteration, serialization and anything
// derived from them is deterministic.
class KnowledgeGraph {
 public:
  struct InsertStats {
    std::size_t new_entities = 0;
    std::size_t new_relations = 0;
    std::size_t rejected = 0;
  };

  // Set-union on canonical identity. A longer description replaces a shorter
  // one; relations with absent endpoints create stub entities. Items with an
  // empty canonical label are skipped and counted in `rejected`.
  InsertStats Insert(const std::vector<Entity>& entities,
                     const std::vector<Relation>& relations);
  InsertStats Insert(const KnowledgeGraph& other);
  bool AddEntity(const Entity& entity);
  bool AddRelation(const Relation& relation);

  bool HasEntity(const std::string& canonical) const {
    return entities_.count(canonical) > 0;
  }
  bool HasRelation(const std::string& source, const std::string& target) const {
    return relations_.count({source, target}) > 0;
  }
  const Entity* FindEntity(const std::string& canonical) const;
  const Relation* FindRelation(const std::string& source,
                               const std::string& target) const;

  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::map<EdgeKey, Relation>& relations() const { return relations_; }
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  bool empty() const { return entities_.empty(); }

  // Distinct neighbors of `canonical` on the undirected projection.
  std::vector<std::string> Neighbors(const std::string& canonical) const;

  // Equality on canonical labels, relation pairs and descriptions.
  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  std::map<std::string, Entity> entities_;
  std::map<EdgeKey, Relation> relations_;
};

// Undirected degree: number of distinct neighbors on the undirected
// projection. Antiparallel pairs count once and a self-loop counts once.
std::map<std::string, std::size_t> UndirectedDegree(const KnowledgeGraph& graph);

struct PageRankResult {
  std::map<std::string, double> scores;
  bool converged = false;
  int iterations = 0;
};

// Power iteration on the undirected projection. Mass on nodes without
// neighbors is spread uniformly, so the scores always sum to one.
PageRankResult PageRank(const KnowledgeGraph& graph, double damping = 0.85,
                        double tol = 1e-10, int max_iters = 200);

struct ImportanceTable {
  std::map<std::string, double> degree;
  std::map<std::string, double> pagerank;
};

ImportanceTable ComputeImportance(const KnowledgeGraph& graph);

class KgFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadResult {
  KnowledgeGraph graph;
  std::vector<std::string> warnings;
};

// JSON format:
//   {"entities":[{"label":..,"description":..}],
//    "relations":[{"source":..,"target":..,"description":..}]}
// Labels are written raw and canonicalized on load.
LoadResult ParseKnowledgeGraph(std::string_view json_text);
LoadResult LoadKnowledgeGraph(const std::filesystem::path& path);
std::string SerializeKnowledgeGraph(const KnowledgeGraph& graph);
void SaveKnowledgeGraph(const KnowledgeGraph& graph,
                        const std::filesystem::path& path);

}  // namespace kgleak

#endif  // KGLEAK_KG_H_
