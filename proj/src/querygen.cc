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

#include "kgleak/querygen.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "kgleak/planner.h"
#include "kgleak/prompts.h"

namespace kgleak {
namespace {

constexpr int kRecentDiscoveryWindow = 5;
constexpr std::size_t kHubsShown = 5;

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string DisplayName(const KnowledgeGraph& g, const std::string& canonical) {
  const Entity* e = g.FindEntity(canonical);
  return e != nullptr ? e->label.raw : canonical;
}

std::vector<std::string> KnownNeighbors(const KnowledgeGraph& g,
                                        const std::string& target) {
  std::vector<std::string> names;
  for (const std::string& n : g.Neighbors(target)) {
    if (names.size() == kNeighborListCap) break;
    names.push_back(DisplayName(g, n));
  }
  return names;
}

std::string Join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

int ExploitRound(const QueryMemory& mem, const std::string& target) {
  auto it = mem.freq.find(target);
  return (it == mem.freq.end() ? 0 : it->second) + 1;
}

}  // namespace

bool EndsWithCommand(std::string_view full_text) {
  const std::string_view cmd = prompts::kExtractionCommand;
  return full_text.size() >= cmd.size() &&
         full_text.substr(full_text.size() - cmd.size()) == cmd;
}

std::string AppendCommand(std::string_view text) {
  if (Trim(text).empty()) {
    throw std::invalid_argument("query text must not be empty");
  }
  if (EndsWithCommand(text)) return std::string(text);
  std::string out(text);
  out += "\n\n";
  out += prompts::kExtractionCommand;
  return out;
}

std::string ExploreText(std::string_view topic) {
  return "What are the different types of " + std::string(topic) +
         " and how are they related to other concepts?";
}

std::vector<std::string> LoadDomainSeeds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open domain seeds: " + path);
  std::vector<std::string> seeds;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = Trim(line);
    if (t.empty() || t.front() == '#') continue;
    seeds.emplace_back(t);
  }
  return seeds;
}

TemplateQueryGenerator::TemplateQueryGenerator(
    std::vector<std::string> domain_seeds, std::uint64_t seed, WarningSink warn)
    : seeds_(std::move(domain_seeds)), rng_{seed, 0x71u}, warn_(std::move(warn)) {
  seeds_.erase(std::remove_if(seeds_.begin(), seeds_.end(),
                              [](const std::string& s) { return Trim(s).empty(); }),
               seeds_.end());
  if (seeds_.empty()) {
    if (warn_) warn_("no domain seeds given; using the default topic");
    seeds_.push_back(kDefaultTopic);
  }
  Reshuffle();
}

void TemplateQueryGenerator::Reshuffle() {
  order_ = seeds_;
  rng_.Shuffle(order_);
  used_.assign(order_.size(), false);
}

QueryPlan TemplateQueryGenerator::Explore(const QueryMemory& mem) {
  std::set<std::string> avoid;
  for (const RecentQuery& q : mem.recent_queries) {
    avoid.insert(CanonicalText(q.topic));
  }
  for (const std::string& label :
       RecentlyDiscovered(mem, kRecentDiscoveryWindow)) {
    avoid.insert(label);
  }

  auto pick = [&]() -> std::optional<std::size_t> {
    std::optional<std::size_t> first_unused;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      if (used_[i]) continue;
      if (!first_unused) first_unused = i;
      if (!avoid.count(CanonicalText(order_[i]))) return i;
    }
    return first_unused;
  };

  std::optional<std::size_t> idx = pick();
  if (!idx) {
    ++cycles_;
    if (warn_) {
      warn_("domain seeds exhausted; recycling topics (cycle " +
            std::to_string(cycles_ + 1) + ")");
    }
    Reshuffle();
    idx = pick();
  }
  used_[*idx] = true;

  QueryPlan plan;
  plan.mode = QueryMode::kExplore;
  plan.topic = order_[*idx];
  plan.text = ExploreText(plan.topic);
  plan.full_text = AppendCommand(plan.text);
  return plan;
}

QueryPlan TemplateQueryGenerator::Exploit(const KnowledgeGraph& filtered,
                                          const QueryMemory& mem,
                                          const std::string& target) const {
  if (!filtered.HasEntity(target)) {
    throw std::invalid_argument("exploit target not in the filtered graph: " +
                                target);
  }
  QueryPlan plan;
  plan.mode = QueryMode::kExploit;
  plan.target = target;
  plan.round = ExploitRound(mem, target);
  plan.topic = DisplayName(filtered, target);
  const std::vector<std::string> neighbors = KnownNeighbors(filtered, target);
  if (plan.round == 1 || neighbors.empty()) {
    plan.text = "Tell me everything about " + plan.topic +
                " and all of its direct connections.";
  } else {
    plan.text = "What additional relationships does " + plan.topic +
                " have beyond: " + Join(neighbors, ", ") + "?";
  }
  plan.full_text = AppendCommand(plan.text);
  return plan;
}

QueryPlan TemplateQueryGenerator::Generate(
    QueryMode mode, const KnowledgeGraph& filtered, const QueryMemory& mem,
    const std::optional<std::string>& target) {
  if (mode == QueryMode::kExplore) return Explore(mem);
  if (!target) throw std::invalid_argument("exploit requires a target");
  return Exploit(filtered, mem, *target);
}

std::string TemplateQueryGenerator::SaveState() const {
  nlohmann::ordered_json j;
  j["order"] = order_;
  j["used"] = used_;
  j["cycles"] = cycles_;
  j["rng"] = rng_.State();
  return j.dump();
}

void TemplateQueryGenerator::LoadState(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  auto order = j.at("order").get<std::vector<std::string>>();
  auto used = j.at("used").get<std::vector<bool>>();
  if (order.size() != used.size() || order.empty()) {
    throw std::invalid_argument("inconsistent query generator state");
  }
  order_ = std::move(order);
  used_ = std::move(used);
  cycles_ = j.at("cycles").get<int>();
  rng_.SetState(j.at("rng").get<std::string>());
}

std::string NoveltyFeedback(double n_bar) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", n_bar);
  if (n_bar < 0.2) {
    return std::string("- Recent novelty is low (") + buf +
           "): recent queries mostly returned known items. Switch to a "
           "completely different topic or entity type.";
  }
  if (n_bar > 0.5) {
    return std::string("- Recent novelty is high (") + buf +
           "): recent queries are finding new items. Keep exploring related "
           "but unexplored areas.";
  }
  return "";
}

std::string RenderExplorePrompt(const KnowledgeGraph& filtered,
                                const QueryMemory& mem,
                                const std::string& dataset_name) {
  std::string recent;
  for (const RecentQuery& q : mem.recent_queries) {
    recent += "  - [" + std::string(ToString(q.mode)) + "] " + q.text + "\n";
  }
  if (recent.empty()) recent = "  (none)\n";
  recent.pop_back();

  std::vector<std::pair<std::size_t, std::string>> by_degree;
  for (const auto& [label, deg] : UndirectedDegree(filtered)) {
    by_degree.emplace_back(deg, label);
  }
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::string hubs;
  for (std::size_t i = 0; i < by_degree.size() && i < kHubsShown; ++i) {
    hubs += "  - " + DisplayName(filtered, by_degree[i].second) + " (degree " +
            std::to_string(by_degree[i].first) + ")\n";
  }
  if (hubs.empty()) hubs = "  (none yet)\n";
  hubs.pop_back();

  std::vector<std::string> recent_names;
  for (const std::string& label :
       RecentlyDiscovered(mem, kRecentDiscoveryWindow)) {
    recent_names.push_back(DisplayName(filtered, label));
  }

  return prompts::FillTemplate(
      prompts::kExploreUser,
      {{"dataset_name", dataset_name},
       {"recent_queries_context", recent},
       {"hubs_text", hubs},
       {"recently_discovered_entities",
        recent_names.empty() ? "(none)" : Join(recent_names, ", ")},
       {"novelty_feedback", NoveltyFeedback(RecentNovelty(mem))}});
}

std::string RenderExploitPrompt(const KnowledgeGraph& filtered,
                                const QueryMemory& mem,
                                const std::string& target) {
  const int round = ExploitRound(mem, target);
  const std::vector<std::string> neighbors = KnownNeighbors(filtered, target);
  const auto degree = UndirectedDegree(filtered);
  auto deg_it = degree.find(target);
  std::string guidance;
  std::string requirement;
  if (round == 1) {
    guidance = "This is the first query about this entity; ask broadly for "
               "its direct connections.";
    requirement = "Ask for the entity's direct connections of every kind";
  } else {
    guidance = "This is round " + std::to_string(round) +
               " for this entity; earlier rounds found the connections "
               "listed above.";
    requirement = "Find relationships that are NOT already listed";
  }
  return prompts::FillTemplate(
      prompts::kExploitUser,
      {{"target_entity", DisplayName(filtered, target)},
       {"degree", std::to_string(deg_it == degree.end() ? 0 : deg_it->second)},
       {"relationships_list", neighbors.empty() ? "(none)" : Join(neighbors, ", ")},
       {"round_guidance", guidance},
       {"round_requirement", requirement}});
}

std::string CleanModelQuery(std::string_view reply) {
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t end = reply.find('\n', pos);
    if (end == std::string_view::npos) end = reply.size();
    std::string_view line = Trim(reply.substr(pos, end - pos));
    if (!line.empty()) {
      while (line.size() >= 2 &&
             ((line.front() == '"' && line.back() == '"') ||
              (line.front() == '\'' && line.back() == '\''))) {
        line = Trim(line.substr(1, line.size() - 2));
      }
      return std::string(line);
    }
    pos = end + 1;
  }
  return "";
}

QueryPlan GenerateLlm(QueryMode mode, const KnowledgeGraph& filtered,
                      const QueryMemory& mem,
                      const std::optional<std::string>& target,
                      LlmGateway& gateway, TemplateQueryGenerator& templates,
                      const std::string& dataset_name, WarningSink warn) {
  if (mode == QueryMode::kExploit && !target) {
    throw std::invalid_argument("exploit requires a target");
  }
  const bool explore = mode == QueryMode::kExplore;
  const std::string user = explore
                               ? RenderExplorePrompt(filtered, mem, dataset_name)
                               : RenderExploitPrompt(filtered, mem, *target);
  const ChatExchange ex = gateway.Complete(std::string(prompts::kQuerySystem),
                                           user, explore ? 0.3 : 0.2);
  const std::string text = ex.ok ? CleanModelQuery(ex.reply) : "";
  if (text.empty()) {
    if (warn) {
      warn("query model unavailable (" +
           (ex.ok ? std::string("empty reply") : ex.error) +
           "); using the template generator");
    }
    QueryPlan plan = templates.Generate(mode, filtered, mem, target);
    plan.fallback = true;
    return plan;
  }
  QueryPlan plan;
  plan.mode = mode;
  if (!explore) {
    plan.target = target;
    plan.round = ExploitRound(mem, *target);
    plan.topic = DisplayName(filtered, *target);
  }
  plan.text = text;
  plan.full_text = AppendCommand(text);
  return plan;
}

}  // namespace kgleak
