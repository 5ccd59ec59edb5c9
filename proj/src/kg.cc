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

#include "kgleak/kg.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kgleak {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsEmphasis(char c) { return c == '*' || c == '_' || c == '`'; }

char ToUpper(char c) {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

char ClosingBracket(char open) {
  switch (open) {
    case '[': return ']';
    case '(': return ')';
    case '{': return '}';
    case '<': return '>';
    default: return '\0';
  }
}

// True when s = <open> inner <close> and inner never closes the outer pair.
bool HasEnclosingBrackets(std::string_view s) {
  if (s.size() < 2) return false;
  const char close = ClosingBracket(s.front());
  if (close == '\0' || s.back() != close) return false;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == s.front()) ++depth;
    if (s[i] == close && --depth < 0) return false;
  }
  return depth == 0;
}

// Removes surrounding whitespace, emphasis markers and bracket pairs until
// nothing changes.
std::string_view StripDecorations(std::string_view s) {
  while (true) {
    const std::size_t before = s.size();
    s = Trim(s);
    while (!s.empty() && IsEmphasis(s.front())) s.remove_prefix(1);
    while (!s.empty() && IsEmphasis(s.back())) s.remove_suffix(1);
    s = Trim(s);
    if (HasEnclosingBrackets(s)) s = s.substr(1, s.size() - 2);
    if (s.size() == before) return s;
  }
}

std::string NormalizeBody(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == '*') continue;
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ToUpper(c));
  }
  return out;
}

}  // namespace

EntityLabel Canonicalize(std::string_view raw) {
  std::string current(raw);
  // Each pass can expose decorations hidden behind interior '*' runs; iterate
  // to a fixed point so the result is idempotent.
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = NormalizeBody(StripDecorations(current));
    if (next == current) break;
    current = std::move(next);
  }
  return EntityLabel{std::string(raw), std::move(current)};
}

std::string CanonicalText(std::string_view text) { return NormalizeBody(text); }

bool KnowledgeGraph::AddEntity(const Entity& entity) {
  if (entity.label.empty()) return false;
  auto [it, inserted] = entities_.try_emplace(entity.label.canonical, entity);
  if (!inserted && entity.description.size() > it->second.description.size()) {
    it->second.description = entity.description;
  }
  return inserted;
}

bool KnowledgeGraph::AddRelation(const Relation& relation) {
  if (relation.source.empty() || relation.target.empty()) return false;
  AddEntity(Entity{relation.source, ""});
  AddEntity(Entity{relation.target, ""});
  auto [it, inserted] = relations_.try_emplace(
      EdgeKey{relation.source.canonical, relation.target.canonical}, relation);
  if (!inserted &&
      relation.description.size() > it->second.description.size()) {
    it->second.description = relation.description;
  }
  return inserted;
}

KnowledgeGraph::InsertStats KnowledgeGraph::Insert(
    const std::vector<Entity>& entities,
    const std::vector<Relation>& relations) {
  InsertStats stats;
  const std::size_t entities_before = entities_.size();
  for (const Entity& e : entities) {
    if (e.label.empty()) {
      ++stats.rejected;
      continue;
    }
    AddEntity(e);
  }
  for (const Relation& r : relations) {
    if (r.source.empty() || r.target.empty()) {
      ++stats.rejected;
      continue;
    }
    if (AddRelation(r)) ++stats.new_relations;
  }
  stats.new_entities = entities_.size() - entities_before;
  return stats;
}

KnowledgeGraph::InsertStats KnowledgeGraph::Insert(const KnowledgeGraph& other) {
  InsertStats stats;
  const std::size_t entities_before = entities_.size();
  for (const auto& [key, e] : other.entities_) AddEntity(e);
  for (const auto& [key, r] : other.relations_) {
    if (AddRelation(r)) ++stats.new_relations;
  }
  stats.new_entities = entities_.size() - entities_before;
  return stats;
}

const Entity* KnowledgeGraph::FindEntity(const std::string& canonical) const {
  auto it = entities_.find(canonical);
  return it == entities_.end() ? nullptr : &it->second;
}

const Relation* KnowledgeGraph::FindRelation(const std::string& source,
                                             const std::string& target) const {
  auto it = relations_.find({source, target});
  return it == relations_.end() ? nullptr : &it->second;
}

std::vector<std::string> KnowledgeGraph::Neighbors(
    const std::string& canonical) const {
  std::set<std::string> out;
  for (const auto& [key, r] : relations_) {
    if (key.first == canonical) out.insert(key.second);
    if (key.second == canonical) out.insert(key.first);
  }
  return {out.begin(), out.end()};
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  if (a.entities_.size() != b.entities_.size() ||
      a.relations_.size() != b.relations_.size()) {
    return false;
  }
  for (auto ia = a.entities_.begin(), ib = b.entities_.begin();
       ia != a.entities_.end(); ++ia, ++ib) {
    if (ia->first != ib->first ||
        ia->second.description != ib->second.description) {
      return false;
    }
  }
  for (auto ia = a.relations_.begin(), ib = b.relations_.begin();
       ia != a.relations_.end(); ++ia, ++ib) {
    if (ia->first != ib->first ||
        ia->second.description != ib->second.description) {
      return false;
    }
  }
  return true;
}

namespace {

// Undirected adjacency over canonical-ordered node indices.
struct Projection {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> neighbors;
};

Projection Project(const KnowledgeGraph& graph) {
  Projection p;
  std::map<std::string, std::size_t> index;
  for (const auto& [label, e] : graph.entities()) {
    index.emplace(label, p.labels.size());
    p.labels.push_back(label);
  }
  std::vector<std::set<std::size_t>> adj(p.labels.size());
  for (const auto& [key, r] : graph.relations()) {
    const std::size_t s = index.at(key.first);
    const std::size_t t = index.at(key.second);
    adj[s].insert(t);
    adj[t].insert(s);
  }
  p.neighbors.reserve(adj.size());
  for (const auto& set : adj) p.neighbors.emplace_back(set.begin(), set.end());
  return p;
}

}  // namespace

std::map<std::string, std::size_t> UndirectedDegree(const KnowledgeGraph& graph) {
  const Projection p = Project(graph);
  std::map<std::string, std::size_t> degree;
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    degree.emplace(p.labels[i], p.neighbors[i].size());
  }
  return degree;
}

PageRankResult PageRank(const KnowledgeGraph& graph, double damping, double tol,
                        int max_iters) {
  PageRankResult result;
  const Projection p = Project(graph);
  const std::size_t n = p.labels.size();
  if (n == 0) return result;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n);
  std::vector<double> next(n);
  for (int iter = 1; iter <= max_iters; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (p.neighbors[u].empty()) dangling += rank[u];
    }
    const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t u = 0; u < n; ++u) {
      if (p.neighbors[u].empty()) continue;
      const double share =
          damping * rank[u] / static_cast<double>(p.neighbors[u].size());
      for (std::size_t v : p.neighbors[u]) next[v] += share;
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - rank[v]);
    rank.swap(next);
    result.iterations = iter;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t v = 0; v < n; ++v) result.scores.emplace(p.labels[v], rank[v]);
  return result;
}

ImportanceTable ComputeImportance(const KnowledgeGraph& graph) {
  ImportanceTable table;
  for (const auto& [label, d] : UndirectedDegree(graph)) {
    table.degree.emplace(label, static_cast<double>(d));
  }
  table.pagerank = PageRank(graph).scores;
  return table;
}

namespace {

using nlohmann::json;

std::size_t LineOfOffset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

std::string RequireString(const json& obj, const char* field,
                          const std::string& where, bool optional) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    if (optional) return "";
    throw KgFormatError(where + "." + field + ": missing field");
  }
  if (!it->is_string()) {
    throw KgFormatError(where + "." + field + ": expected string");
  }
  return it->get<std::string>();
}

const json& RequireArray(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) {
    throw KgFormatError(std::string(field) + ": missing field");
  }
  if (!it->is_array()) {
    throw KgFormatError(std::string(field) + ": expected array");
  }
  return *it;
}

}  // namespace

LoadResult ParseKnowledgeGraph(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << LineOfOffset(json_text, e.byte) << ": " << e.what();
    throw KgFormatError(msg.str());
  }
  if (!doc.is_object()) throw KgFormatError("top level: expected object");

  LoadResult out;
  const json& entities = RequireArray(doc, "entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const std::string where = "entities[" + std::to_string(i) + "]";
    if (!entities[i].is_object()) throw KgFormatError(where + ": expected object");
    Entity e{Canonicalize(RequireString(entities[i], "label", where, false)),
             RequireString(entities[i], "description", where, true)};
    if (e.label.empty()) {
      out.warnings.push_back(where + ": empty label skipped");
      continue;
    }
    if (out.graph.HasEntity(e.label.canonical)) {
      out.warnings.push_back(where + ": duplicate label '" + e.label.canonical +
                             "' merged");
    }
    out.graph.AddEntity(e);
  }
  const json& relations = RequireArray(doc, "relations");
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const std::string where = "relations[" + std::to_string(i) + "]";
    if (!relations[i].is_object()) {
      throw KgFormatError(where + ": expected object");
    }
    Relation r{Canonicalize(RequireString(relations[i], "source", where, false)),
               Canonicalize(RequireString(relations[i], "target", where, false)),
               RequireString(relations[i], "description", where, true)};
    if (r.source.empty() || r.target.empty()) {
      out.warnings.push_back(where + ": empty endpoint skipped");
      continue;
    }
    if (out.graph.HasRelation(r.source.canonical, r.target.canonical)) {
      out.warnings.push_back(where + ": duplicate relation merged");
    }
    out.graph.AddRelation(r);
  }
  return out;
}

LoadResult LoadKnowledgeGraph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KgFormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseKnowledgeGraph(buf.str());
  } catch (const KgFormatError& e) {
    throw KgFormatError(path.string() + ": " + e.what());
  }
}

std::string SerializeKnowledgeGraph(const KnowledgeGraph& graph) {
  using ordered = nlohmann::ordered_json;
  ordered entities = ordered::array();
  for (const auto& [label, e] : graph.entities()) {
    entities.push_back({{"label", e.label.raw}, {"description", e.description}});
  }
  ordered relations = ordered::array();
  for (const auto& [key, r] : graph.relations()) {
    relations.push_back({{"source", r.source.raw},
                         {"target", r.target.raw},
                         {"description", r.description}});
  }
  ordered doc = ordered::object();
  doc["entities"] = std::move(entities);
  doc["relations"] = std::move(relations);
  return doc.dump() + "\n";
}

void SaveKnowledgeGraph(const KnowledgeGraph& graph,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << SerializeKnowledgeGraph(graph);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace kgleak
