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

#include "kgleak/filtering.h"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kgleak/llm_gateway.h"
#include "kgleak/prompts.h"

namespace kgleak {

std::string_view ToString(Leniency leniency) {
  return leniency == Leniency::kStrict ? "strict" : "lenient";
}

Leniency ParseLeniency(std::string_view text) {
  if (text == "strict") return Leniency::kStrict;
  if (text == "lenient") return Leniency::kLenient;
  throw std::invalid_argument("unknown leniency: " + std::string(text));
}

std::string_view ToString(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::kGeneric: return "generic";
    case DiscardReason::kPlaceholder: return "placeholder";
    case DiscardReason::kUnsupported: return "unsupported";
    case DiscardReason::kHallucinatedHub: return "hallucinated-hub";
    case DiscardReason::kEndpointDiscarded: return "endpoint-discarded";
    case DiscardReason::kModelVerdict: return "model-verdict";
  }
  return "unknown";
}

std::set<std::string> FilterConfig::DefaultGenericTerms() {
  return {"INFORMATION", "DATA",   "SUMMARY", "PEOPLE",
          "RESULTS",     "THINGS", "DETAILS", "CONTENT"};
}

std::set<std::string> FilterConfig::DefaultPlaceholderTerms() {
  return {"NOT SPECIFIED", "NOT SPECIFIED IN RELATIONSHIPS", "N/A", "NA",
          "NONE", "UNKNOWN", "UNSPECIFIED"};
}

std::set<std::string> LoadTermList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open term list " + path.string());
  std::set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    const EntityLabel label = Canonicalize(line);
    if (label.empty() || label.canonical.front() == '#') continue;
    terms.insert(label.canonical);
  }
  return terms;
}

FilterContext MakeFilterContext(std::string_view response,
                                const KnowledgeGraph& prior,
                                const FilterConfig& cfg) {
  if (!(cfg.hub_threshold_factor > 1.0)) {
    throw std::invalid_argument("hub_threshold_factor must exceed 1");
  }
  FilterContext ctx;
  ctx.response = response;
  ctx.prior_graph = &prior;
  ctx.leniency = cfg.leniency;
  ctx.generic_terms = &cfg.generic_terms;
  ctx.placeholder_terms = &cfg.placeholder_terms;
  ctx.stats.hub_threshold_factor = cfg.hub_threshold_factor;
  ctx.stats.per_turn_new_edge_spike = cfg.per_turn_new_edge_spike;
  if (!prior.empty()) {
    double total = 0.0;
    for (const auto& [label, d] : UndirectedDegree(prior)) total += d;
    ctx.stats.avg_degree = total / static_cast<double>(prior.num_entities());
  }
  return ctx;
}

namespace {

const KnowledgeGraph& Prior(const FilterContext& ctx) {
  static const KnowledgeGraph kEmpty;
  return ctx.prior_graph ? *ctx.prior_graph : kEmpty;
}

bool InSet(const std::set<std::string>* set, const std::string& label) {
  return set != nullptr && set->count(label) > 0;
}

// Distinct new neighbors per label, counted over candidate relations not yet
// in the prior graph.
std::map<std::string, std::set<std::string>> NewNeighbors(
    const ParsedCandidates& candidates, const KnowledgeGraph& prior) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& [key, r] : candidates.graph.relations()) {
    if (prior.HasRelation(key.first, key.second)) continue;
    out[key.first].insert(key.second);
    out[key.second].insert(key.first);
  }
  return out;
}

// Keeps relations whose endpoints survived, preserving the invariant that
// kept relations only join kept entities.
void ResolveRelations(const ParsedCandidates& candidates,
                      const FilterContext& ctx,
                      const std::map<EdgeKey, bool>* model_verdicts,
                      const std::string* evidence, FilterVerdicts& out) {
  const KnowledgeGraph& prior = Prior(ctx);
  for (const auto& [key, r] : candidates.graph.relations()) {
    if (prior.HasRelation(key.first, key.second)) {
      out.kept.AddRelation(r);
      continue;
    }
    auto discard = [&](DiscardReason reason) {
      out.discarded.push_back({true, "", key, reason});
    };
    if (!out.kept.HasEntity(key.first) || !out.kept.HasEntity(key.second)) {
      discard(DiscardReason::kEndpointDiscarded);
      continue;
    }
    if (model_verdicts != nullptr) {
      auto it = model_verdicts->find(key);
      const bool keep = it != model_verdicts->end()
                            ? it->second
                            : ctx.leniency == Leniency::kLenient;
      if (keep) {
        out.kept.AddRelation(r);
      } else {
        discard(DiscardReason::kModelVerdict);
      }
      continue;
    }
    const bool source_ok = evidence->find(key.first) != std::string::npos;
    const bool target_ok = evidence->find(key.second) != std::string::npos;
    const bool supported = ctx.leniency == Leniency::kStrict
                               ? (source_ok && target_ok)
                               : (source_ok || target_ok);
    if (supported) {
      out.kept.AddRelation(r);
    } else {
      discard(DiscardReason::kUnsupported);
    }
  }
}

}  // namespace

FilterVerdicts FilterRuleBased(const ParsedCandidates& candidates,
                               const FilterContext& ctx) {
  const KnowledgeGraph& prior = Prior(ctx);
  const std::string evidence = CanonicalText(EvidenceText(ctx.response));
  const auto new_neighbors = NewNeighbors(candidates, prior);
  const double hub_degree_limit =
      ctx.stats.hub_threshold_factor * ctx.stats.avg_degree;

  FilterVerdicts out;
  for (const auto& [label, e] : candidates.graph.entities()) {
    if (prior.HasEntity(label)) {
      out.kept.AddEntity(e);
      continue;
    }
    auto discard = [&](DiscardReason reason) {
      out.discarded.push_back({false, label, {}, reason});
    };
    if (InSet(ctx.placeholder_terms, label)) {
      discard(DiscardReason::kPlaceholder);
      continue;
    }
    if (InSet(ctx.generic_terms, label)) {
      discard(DiscardReason::kGeneric);
      continue;
    }
    if (evidence.find(label) == std::string::npos) {
      discard(DiscardReason::kUnsupported);
      continue;
    }
    // A new entity has no prior degree, so its would-be degree is its count
    // of new neighbors this turn.
    auto it = new_neighbors.find(label);
    const std::size_t new_edges = it == new_neighbors.end() ? 0 : it->second.size();
    if (static_cast<double>(new_edges) > hub_degree_limit &&
        new_edges > ctx.stats.per_turn_new_edge_spike) {
      discard(DiscardReason::kHallucinatedHub);
      continue;
    }
    out.kept.AddEntity(e);
  }
  ResolveRelations(candidates, ctx, nullptr, &evidence, out);
  return out;
}

std::string FilterSystemPrompt(Leniency leniency) {
  return std::string(leniency == Leniency::kStrict
                         ? prompts::kFilterSystemStrict
                         : prompts::kFilterSystemLenient);
}

std::string FilterUserPrompt(const ParsedCandidates& candidates,
                             const FilterContext& ctx) {
  const KnowledgeGraph& prior = Prior(ctx);
  const auto new_neighbors = NewNeighbors(candidates, prior);

  std::ostringstream guidance;
  guidance << "EXTRACTION GUIDANCE:\n";
  guidance << "- Average degree in the accepted graph: " << ctx.stats.avg_degree
           << "\n";
  guidance << "- Entities with degree above "
           << ctx.stats.hub_threshold_factor * ctx.stats.avg_degree
           << " that gain more than " << ctx.stats.per_turn_new_edge_spike
           << " new connections in one turn may be hallucinated hubs.\n";
  for (const auto& [label, nbrs] : new_neighbors) {
    if (nbrs.size() > ctx.stats.per_turn_new_edge_spike) {
      guidance << "- WARNING: " << label << " gains " << nbrs.size()
               << " new connections in this response.\n";
    }
  }

  std::ostringstream context;
  context << "GRAPH CONTEXT:\n";
  context << "- Accepted graph: " << prior.num_entities() << " entities, "
          << prior.num_relations() << " relationships.\n";
  std::vector<std::string> known;
  for (const auto& [label, e] : candidates.graph.entities()) {
    if (prior.HasEntity(label)) known.push_back(label);
  }
  context << "- Candidates already in the graph (previously accepted): ";
  if (known.empty()) context << "none";
  for (std::size_t i = 0; i < known.size(); ++i) {
    context << (i ? ", " : "") << known[i];
  }
  context << "\n";

  std::ostringstream items;
  for (const auto& [label, e] : candidates.graph.entities()) {
    if (!prior.HasEntity(label)) items << "ENTITY: " << label << "\n";
  }
  for (const auto& [key, r] : candidates.graph.relations()) {
    if (!prior.HasRelation(key.first, key.second)) {
      items << "RELATIONSHIP: " << key.first << " -> " << key.second << "\n";
    }
  }

  return prompts::FillTemplate(
      prompts::kFilterUser, {{"extraction_guidance", guidance.str()},
                             {"graph_context", context.str()},
                             {"candidate_items", items.str()},
                             {"text_content", std::string(ctx.response)}});
}

namespace {

std::vector<std::string> SplitArrows(std::string_view line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find("->", start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(line.substr(start));
      return parts;
    }
    parts.emplace_back(line.substr(start, pos - start));
    start = pos + 2;
  }
}

std::optional<bool> ParseDecision(const std::string& text) {
  const std::string canonical = Canonicalize(text).canonical;
  if (canonical.rfind("KEEP", 0) == 0) return true;
  if (canonical.rfind("DISCARD", 0) == 0) return false;
  return std::nullopt;
}

}  // namespace

ModelVerdicts ParseModelVerdicts(std::string_view reply) {
  ModelVerdicts out;
  std::size_t start = 0;
  while (start <= reply.size()) {
    std::size_t end = reply.find('\n', start);
    if (end == std::string_view::npos) end = reply.size();
    std::string_view line = reply.substr(start, end - start);
    start = end + 1;

    // Strip list markers and emphasis, then look for the keyword.
    std::string flat;
    for (char c : line) {
      if (c != '*' && c != '`') flat.push_back(c);
    }
    std::string_view s = flat;
    while (!s.empty() && (s.front() == ' ' || s.front() == '-' ||
                          s.front() == '\t' || s.front() == '"')) {
      s.remove_prefix(1);
    }
    auto starts_with_ci = [](std::string_view s, std::string_view kw) {
      if (s.size() < kw.size()) return false;
      for (std::size_t i = 0; i < kw.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(s[i])) != kw[i]) return false;
      }
      return true;
    };
    if (starts_with_ci(s, "ENTITY:")) {
      const auto parts = SplitArrows(s.substr(7));
      if (parts.size() != 2) continue;
      const EntityLabel label = Canonicalize(parts[0]);
      const auto decision = ParseDecision(parts[1]);
      if (!label.empty() && decision) out.entities[label.canonical] = *decision;
    } else if (starts_with_ci(s, "RELATIONSHIP:")) {
      const auto parts = SplitArrows(s.substr(13));
      if (parts.size() != 3) continue;
      const EntityLabel source = Canonicalize(parts[0]);
      const EntityLabel target = Canonicalize(parts[1]);
      const auto decision = ParseDecision(parts[2]);
      if (!source.empty() && !target.empty() && decision) {
        out.relations[{source.canonical, target.canonical}] = *decision;
      }
    }
    if (end == reply.size()) break;
  }
  return out;
}

FilterVerdicts FilterLlm(const ParsedCandidates& candidates,
                         const FilterContext& ctx, LlmGateway& gateway) {
  const KnowledgeGraph& prior = Prior(ctx);
  bool has_new = false;
  for (const auto& [label, e] : candidates.graph.entities()) {
    if (!prior.HasEntity(label)) has_new = true;
  }
  for (const auto& [key, r] : candidates.graph.relations()) {
    if (!prior.HasRelation(key.first, key.second)) has_new = true;
  }

  ModelVerdicts verdicts;
  if (has_new) {
    const ChatExchange exchange =
        gateway.Complete(FilterSystemPrompt(ctx.leniency),
                         FilterUserPrompt(candidates, ctx));
    if (!exchange.ok) {
      FilterVerdicts fallback = FilterRuleBased(candidates, ctx);
      fallback.downgraded = true;
      fallback.downgrade_reason = exchange.error;
      return fallback;
    }
    verdicts = ParseModelVerdicts(exchange.reply);
  }

  const bool default_keep = ctx.leniency == Leniency::kLenient;
  FilterVerdicts out;
  for (const auto& [label, e] : candidates.graph.entities()) {
    if (prior.HasEntity(label)) {
      out.kept.AddEntity(e);
      continue;
    }
    auto it = verdicts.entities.find(label);
    const bool keep = it != verdicts.entities.end() ? it->second : default_keep;
    if (keep) {
      out.kept.AddEntity(e);
    } else {
      out.discarded.push_back({false, label, {}, DiscardReason::kModelVerdict});
    }
  }
  ResolveRelations(candidates, ctx, &verdicts.relations, nullptr, out);
  return out;
}

}  // namespace kgleak
