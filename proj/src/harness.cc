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

#include "kgleak/harness.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "kgleak/extraction.h"
#include "kgleak/memory.h"
#include "kgleak/prompts.h"
#include "kgleak/querygen.h"

namespace kgleak {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPlannerStream = 1;

// ---------------------------------------------------------------------------
// Small file helpers.

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw RunError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<Json> ReadJsonl(const fs::path& path) {
  std::vector<Json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(Json::parse(line));
  }
  return out;
}

// Drops log lines past `max_turn`, left over from a turn that never reached
// its checkpoint.
void TruncateJsonl(const fs::path& path, int max_turn) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::string kept;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (Json::parse(line).at("turn").get<int>() <= max_turn) kept += line + "\n";
  }
  in.close();
  WriteFileAtomic(path, kept);
}

// ---------------------------------------------------------------------------
// JSON forms of small records.

Json MetricsJson(const MetricReport& r) {
  Json j;
  j["leak_nodes"] = r.leak_nodes;
  j["leak_edges"] = r.leak_edges;
  j["prec_nodes"] = r.prec_nodes;
  j["prec_edges"] = r.prec_edges;
  j["leak_deg"] = r.leak_deg;
  j["leak_pr"] = r.leak_pr;
  j["empty_nodes"] = r.empty_nodes;
  j["empty_edges"] = r.empty_edges;
  return j;
}

MetricReport MetricsFromJson(const Json& j, int turn) {
  MetricReport r;
  r.turn = turn;
  r.leak_nodes = j.at("leak_nodes").get<double>();
  r.leak_edges = j.at("leak_edges").get<double>();
  r.prec_nodes = j.at("prec_nodes").get<double>();
  r.prec_edges = j.at("prec_edges").get<double>();
  r.leak_deg = j.at("leak_deg").get<double>();
  r.leak_pr = j.at("leak_pr").get<double>();
  r.empty_nodes = j.value("empty_nodes", false);
  r.empty_edges = j.value("empty_edges", false);
  return r;
}

bool SameMetrics(const MetricReport& a, const MetricReport& b) {
  return a.leak_nodes == b.leak_nodes && a.leak_edges == b.leak_edges &&
         a.prec_nodes == b.prec_nodes && a.prec_edges == b.prec_edges &&
         a.leak_deg == b.leak_deg && a.leak_pr == b.leak_pr;
}

Json GraphJson(const KnowledgeGraph& g) {
  return Json::parse(SerializeKnowledgeGraph(g));
}

KnowledgeGraph GraphFromJson(const Json& j) {
  return ParseKnowledgeGraph(j.dump()).graph;
}

Json ItemSets(const KnowledgeGraph& g) {
  Json ents = Json::array();
  for (const auto& [label, e] : g.entities()) ents.push_back(label);
  Json rels = Json::array();
  for (const auto& [key, r] : g.relations()) {
    rels.push_back(Json::array({key.first, key.second}));
  }
  Json j;
  j["entities"] = std::move(ents);
  j["relations"] = std::move(rels);
  return j;
}

Json QueryMemoryJson(const QueryMemory& q) {
  Json j;
  j["novelty_history"] = q.novelty_history;
  j["epsilon"] = q.epsilon;
  j["decay_steps"] = q.decay_steps;
  j["turn"] = q.turn;
  j["freq"] = q.freq;
  j["last_discovered_turn"] = q.last_discovered_turn;
  Json recent = Json::array();
  for (const RecentQuery& r : q.recent_queries) {
    recent.push_back(Json{{"mode", ToString(r.mode)}, {"text", r.text},
                          {"topic", r.topic}});
  }
  j["recent_queries"] = std::move(recent);
  Json outcomes = Json::array();
  for (const ExploreOutcome& o : q.explore_outcomes) {
    outcomes.push_back(Json::array({o.was_explore, o.added_new_node}));
  }
  j["explore_outcomes"] = std::move(outcomes);
  return j;
}

QueryMemory QueryMemoryFromJson(const Json& j) {
  QueryMemory q;
  q.novelty_history = j.at("novelty_history").get<std::vector<double>>();
  q.epsilon = j.at("epsilon").get<double>();
  q.decay_steps = j.at("decay_steps").get<int>();
  q.turn = j.at("turn").get<int>();
  q.freq = j.at("freq").get<std::map<std::string, int>>();
  q.last_discovered_turn =
      j.at("last_discovered_turn").get<std::map<std::string, int>>();
  for (const Json& r : j.at("recent_queries")) {
    q.recent_queries.push_back(
        RecentQuery{ParseQueryMode(r.at("mode").get<std::string>()),
                    r.at("text").get<std::string>(),
                    r.at("topic").get<std::string>()});
  }
  for (const Json& o : j.at("explore_outcomes")) {
    q.explore_outcomes.push_back(ExploreOutcome{o.at(0).get<bool>(), o.at(1).get<bool>()});
  }
  return q;
}

// ---------------------------------------------------------------------------
// Config.

template <typename T>
void Take(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void CheckKeys(const Json& obj, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

fs::path Resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void ParseVictim(const Json& v, RunConfig& cfg) {
  CheckKeys(v,
            {"top_k_entities", "top_k_relations", "p_hallucinate_entity",
             "p_hallucinate_edge", "p_drop_item", "p_placeholder", "noise_seed"},
            "victim");
  Take(v, "top_k_entities", cfg.retrieval.top_k_entities);
  Take(v, "top_k_relations", cfg.retrieval.top_k_relations);
  Take(v, "p_hallucinate_entity", cfg.noise.p_hallucinate_entity);
  Take(v, "p_hallucinate_edge", cfg.noise.p_hallucinate_edge);
  Take(v, "p_drop_item", cfg.noise.p_drop_item);
  Take(v, "p_placeholder", cfg.noise.p_placeholder);
  if (v.contains("noise_seed")) {
    cfg.noise.rng_seed = v.at("noise_seed").get<std::uint64_t>();
    cfg.noise_seed_set = true;
  }
}

void ParsePlanner(const Json& p, PlannerConfig& c) {
  CheckKeys(p,
            {"epsilon_init", "epsilon_min", "gamma", "tau_init", "window_k",
             "failure_override", "fail_rate", "fail_window", "fail_min_explores",
             "lambda", "beta_new", "beta_old"},
            "planner");
  Take(p, "epsilon_init", c.epsilon_init);
  Take(p, "epsilon_min", c.epsilon_min);
  Take(p, "gamma", c.gamma);
  Take(p, "tau_init", c.tau_init);
  Take(p, "window_k", c.window_k);
  Take(p, "failure_override", c.failure_override);
  Take(p, "fail_rate", c.fail_rate);
  Take(p, "fail_window", c.fail_window);
  Take(p, "fail_min_explores", c.fail_min_explores);
  Take(p, "lambda", c.lambda);
  Take(p, "beta_new", c.beta_new);
  Take(p, "beta_old", c.beta_old);
}

void ParseFilterConfig(const Json& f, const fs::path& base, FilterConfig& c) {
  CheckKeys(f,
            {"leniency", "hub_threshold_factor", "per_turn_new_edge_spike",
             "generic_terms", "placeholder_terms", "generic_terms_file",
             "placeholder_terms_file"},
            "filter_config");
  if (f.contains("leniency")) {
    c.leniency = ParseLeniency(f.at("leniency").get<std::string>());
  }
  Take(f, "hub_threshold_factor", c.hub_threshold_factor);
  Take(f, "per_turn_new_edge_spike", c.per_turn_new_edge_spike);
  Take(f, "generic_terms", c.generic_terms);
  Take(f, "placeholder_terms", c.placeholder_terms);
  if (f.contains("generic_terms_file")) {
    c.generic_terms = LoadTermList(
        Resolve(base, f.at("generic_terms_file").get<std::string>()));
  }
  if (f.contains("placeholder_terms_file")) {
    c.placeholder_terms = LoadTermList(
        Resolve(base, f.at("placeholder_terms_file").get<std::string>()));
  }
}

void ParseGateway(const Json& g, GatewayConfig& c) {
  CheckKeys(g,
            {"endpoint", "model_name", "api_key_env", "temperature", "max_tokens",
             "timeout_ms", "max_retries", "backoff_base_ms"},
            "gateway");
  Take(g, "endpoint", c.endpoint);
  Take(g, "model_name", c.model_name);
  Take(g, "api_key_env", c.api_key_env);
  Take(g, "temperature", c.temperature);
  Take(g, "max_tokens", c.max_tokens);
  Take(g, "max_retries", c.max_retries);
  if (g.contains("timeout_ms")) {
    c.timeout = std::chrono::milliseconds(g.at("timeout_ms").get<long long>());
  }
  if (g.contains("backoff_base_ms")) {
    c.backoff_base =
        std::chrono::milliseconds(g.at("backoff_base_ms").get<long long>());
  }
}

// ---------------------------------------------------------------------------
// Run state shared by the loop, the checkpoint and the replay.

struct Session {
  RunConfig cfg;
  KnowledgeGraph truth;
  std::unique_ptr<Evaluator> eval;
  std::vector<std::string> topics;
  AttackMemory mem;
  Rng rng;
  std::unique_ptr<TemplateQueryGenerator> tgen;
  std::vector<MetricReport> curves;
  std::vector<MetricReport> raw_curves;
  Json counters;
};

WarningSink MakeSink(std::ostream* log) {
  if (log == nullptr) return {};
  return [log](const std::string& msg) { *log << "warning: " << msg << "\n"; };
}

void InitSession(Session& s, const RunConfig& cfg, std::ostream* log) {
  Validate(cfg);
  s.cfg = cfg;
  if (!s.cfg.noise_seed_set) s.cfg.noise.rng_seed = cfg.rng_seed;
  s.truth = LoadTruth(s.cfg);
  s.eval = std::make_unique<Evaluator>(s.truth,
                                       MatchOptions{s.cfg.directed_edges});
  s.topics = LoadTopics(s.cfg);
  s.mem = AttackMemory{};
  s.mem.query.epsilon = s.cfg.planner.epsilon_init;
  s.rng = Rng{s.cfg.rng_seed, kPlannerStream};
  s.tgen = std::make_unique<TemplateQueryGenerator>(s.topics, s.cfg.rng_seed,
                                                    MakeSink(log));
  s.counters = Json{{"explore_turns", 0},     {"exploit_turns", 0},
                    {"exploit_fallbacks", 0}, {"forced_exploits", 0},
                    {"query_fallbacks", 0},   {"filter_downgrades", 0}};
}

FilterVerdicts KeepAll(const ParsedCandidates& parsed) {
  FilterVerdicts v;
  v.kept = parsed.graph;
  return v;
}

// Restricts `parsed` to the entity and relation ids listed in `sets`.
KnowledgeGraph KeptFromSets(const KnowledgeGraph& parsed, const Json& sets) {
  KnowledgeGraph kept;
  for (const Json& label : sets.at("entities")) {
    if (const Entity* e = parsed.FindEntity(label.get<std::string>())) {
      kept.AddEntity(*e);
    }
  }
  for (const Json& pair : sets.at("relations")) {
    const EdgeKey key{pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    if (const Relation* r = parsed.FindRelation(key.first, key.second)) {
      kept.AddRelation(*r);
    }
  }
  return kept;
}

Json DiscardsJson(const FilterVerdicts& v) {
  Json out = Json::array();
  for (const DiscardedItem& d : v.discarded) {
    Json item;
    if (d.is_relation) {
      item["relation"] = Json::array({d.relation.first, d.relation.second});
    } else {
      item["entity"] = d.entity;
    }
    item["reason"] = ToString(d.reason);
    out.push_back(std::move(item));
  }
  return out;
}

Json DecisionJson(const ModeDecision& d) {
  Json j;
  j["epsilon"] = d.epsilon_used;
  j["tau"] = d.tau_used;
  j["n_bar"] = d.n_bar;
  j["z_draw"] = d.z_draw;
  j["b_indicator"] = d.b_indicator;
  j["forced_by_failure"] = d.forced_by_failure;
  return j;
}

std::string CheckpointText(const Session& s) {
  Json j;
  j["turn"] = s.mem.query.turn;
  j["config"] = Json::parse(SerializeRunConfig(s.cfg));
  j["rng"] = s.rng.State();
  j["querygen"] = Json::parse(s.tgen->SaveState());
  j["query_memory"] = QueryMemoryJson(s.mem.query);
  j["raw_graph"] = GraphJson(s.mem.graphs.raw);
  j["filtered_graph"] = GraphJson(s.mem.graphs.filtered);
  j["counters"] = s.counters;
  return j.dump() + "\n";
}

void RestoreCheckpoint(Session& s, const Json& j) {
  if (j.at("config") != Json::parse(SerializeRunConfig(s.cfg))) {
    throw RunError("checkpoint was written by a different config");
  }
  s.rng.SetState(j.at("rng").get<std::string>());
  s.tgen->LoadState(j.at("querygen").dump());
  s.mem.query = QueryMemoryFromJson(j.at("query_memory"));
  s.mem.graphs.raw = GraphFromJson(j.at("raw_graph"));
  s.mem.graphs.filtered = GraphFromJson(j.at("filtered_graph"));
  s.counters = j.at("counters");
}

void Bump(Json& counters, const char* key) {
  counters[key] = counters[key].get<int>() + 1;
}

std::string SummaryText(const Session& s, const RunResult& r) {
  const MetricReport& last = r.curves.back();
  Json j;
  j["budget"] = s.cfg.budget;
  j["turns"] = s.mem.query.turn;
  j["victim_queries"] = s.mem.query.turn + (s.cfg.seed_query ? 1 : 0);
  j["strategy"] = ToString(s.cfg.strategy);
  j["filter"] = ToString(s.cfg.filter);
  j["querygen"] = ToString(s.cfg.querygen);
  j["rng_seed"] = s.cfg.rng_seed;
  j["truth_fingerprint"] = GraphFingerprint(s.truth);
  j["truth_nodes"] = s.truth.num_entities();
  j["truth_edges"] = s.truth.num_relations();
  j["extracted_nodes"] = s.mem.graphs.filtered.num_entities();
  j["extracted_edges"] = s.mem.graphs.filtered.num_relations();
  j["raw_nodes"] = s.mem.graphs.raw.num_entities();
  j["raw_edges"] = s.mem.graphs.raw.num_relations();
  for (const auto& [key, value] : s.counters.items()) j[key] = value;
  j["final"] = MetricsJson(last);
  j["l_bar"] = (last.leak_nodes + last.leak_edges) / 2.0;
  j["p_bar"] = (last.prec_nodes + last.prec_edges) / 2.0;
  j["elapsed_seconds"] = r.elapsed_seconds;
  return j.dump(2) + "\n";
}

void WriteCurvesFile(const fs::path& path, const std::vector<MetricReport>& rows) {
  std::ostringstream out;
  WriteCurves(out, rows);
  WriteFileAtomic(path, out.str());
}

void AppendLine(std::ofstream& out, const Json& j) {
  out << j.dump() << '\n';
  out.flush();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view ToString(Strategy s) {
  switch (s) {
    case Strategy::kAdaptive:
      return "adaptive";
    case Strategy::kExploreOnly:
      return "explore_only";
    case Strategy::kExploitOnly:
      return "exploit_only";
    case Strategy::kStaticBaseline:
      return "static_baseline";
  }
  return "unknown";
}

std::string_view ToString(FilterKind f) {
  switch (f) {
    case FilterKind::kRule:
      return "rule";
    case FilterKind::kLlm:
      return "llm";
    case FilterKind::kNone:
      return "none";
  }
  return "unknown";
}

std::string_view ToString(QueryGenKind q) {
  return q == QueryGenKind::kTemplate ? "template" : "llm";
}

Strategy ParseStrategy(std::string_view text) {
  if (text == "adaptive") return Strategy::kAdaptive;
  if (text == "explore_only") return Strategy::kExploreOnly;
  if (text == "exploit_only") return Strategy::kExploitOnly;
  if (text == "static_baseline") return Strategy::kStaticBaseline;
  throw ConfigError("unknown strategy: " + std::string(text));
}

FilterKind ParseFilterKind(std::string_view text) {
  if (text == "rule") return FilterKind::kRule;
  if (text == "llm") return FilterKind::kLlm;
  if (text == "none") return FilterKind::kNone;
  throw ConfigError("unknown filter: " + std::string(text));
}

QueryGenKind ParseQueryGenKind(std::string_view text) {
  if (text == "template") return QueryGenKind::kTemplate;
  if (text == "llm") return QueryGenKind::kLlm;
  throw ConfigError("unknown querygen: " + std::string(text));
}

void Validate(const RunConfig& cfg) {
  if (cfg.budget < 1) throw ConfigError("budget must be >= 1");
  if (cfg.dataset.empty() && !cfg.synthetic) {
    throw ConfigError("config needs a dataset path or a synthetic spec");
  }
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  try {
    Validate(cfg.retrieval);
    Validate(cfg.noise);
    Validate(cfg.planner);
    if (cfg.synthetic) Validate(*cfg.synthetic);
    if (cfg.filter == FilterKind::kLlm || cfg.querygen == QueryGenKind::kLlm) {
      Validate(cfg.gateway);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.filter_config.hub_threshold_factor > 1.0)) {
    throw ConfigError("hub_threshold_factor must exceed 1");
  }
}

RunConfig ParseRunConfig(std::string_view json_text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  CheckKeys(j,
            {"budget", "dataset", "synthetic", "dataset_name", "domain_seeds",
             "domain_topics", "victim", "planner", "strategy", "filter",
             "filter_config", "querygen", "gateway", "seed_query", "output_dir",
             "rng_seed", "directed_edges", "track_raw_curves"},
            "config");
  RunConfig cfg;
  try {
    Take(j, "budget", cfg.budget);
    if (j.contains("dataset")) {
      cfg.dataset = Resolve(base_dir, j.at("dataset").get<std::string>());
    }
    if (j.contains("synthetic")) {
      const Json& s = j.at("synthetic");
      CheckKeys(s, {"model", "nodes", "edges", "seed", "connected", "name_vocab"},
                "synthetic");
      SynthSpec spec;
      if (s.contains("model")) {
        spec.model = ParseSynthModel(s.at("model").get<std::string>());
      }
      Take(s, "nodes", spec.n_nodes);
      Take(s, "edges", spec.n_edges);
      Take(s, "seed", spec.seed);
      Take(s, "connected", spec.connected);
      Take(s, "name_vocab", spec.name_vocab);
      cfg.synthetic = spec;
    }
    Take(j, "dataset_name", cfg.dataset_name);
    if (j.contains("domain_seeds")) {
      cfg.domain_seeds = Resolve(base_dir, j.at("domain_seeds").get<std::string>());
    }
    Take(j, "domain_topics", cfg.domain_topics);
    if (j.contains("victim")) ParseVictim(j.at("victim"), cfg);
    if (j.contains("planner")) ParsePlanner(j.at("planner"), cfg.planner);
    if (j.contains("strategy")) {
      cfg.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    }
    if (j.contains("filter")) {
      cfg.filter = ParseFilterKind(j.at("filter").get<std::string>());
    }
    if (j.contains("filter_config")) {
      ParseFilterConfig(j.at("filter_config"), base_dir, cfg.filter_config);
    }
    if (j.contains("querygen")) {
      cfg.querygen = ParseQueryGenKind(j.at("querygen").get<std::string>());
    }
    if (j.contains("gateway")) ParseGateway(j.at("gateway"), cfg.gateway);
    if (j.contains("seed_query") && !j.at("seed_query").is_null()) {
      cfg.seed_query = j.at("seed_query").get<std::string>();
    }
    if (j.contains("output_dir")) {
      cfg.output_dir = Resolve(base_dir, j.at("output_dir").get<std::string>());
    }
    Take(j, "rng_seed", cfg.rng_seed);
    Take(j, "directed_edges", cfg.directed_edges);
    Take(j, "track_raw_curves", cfg.track_raw_curves);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig LoadRunConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str(), path.parent_path());
}

std::string SerializeRunConfig(const RunConfig& cfg) {
  Json j;
  j["budget"] = cfg.budget;
  if (!cfg.dataset.empty()) j["dataset"] = cfg.dataset.string();
  if (cfg.synthetic) {
    const SynthSpec& s = *cfg.synthetic;
    j["synthetic"] = Json{{"model", ToString(s.model)},
                          {"nodes", s.n_nodes},
                          {"edges", s.n_edges},
                          {"seed", s.seed},
                          {"connected", s.connected},
                          {"name_vocab", s.name_vocab}};
  }
  j["dataset_name"] = cfg.dataset_name;
  if (!cfg.domain_seeds.empty()) j["domain_seeds"] = cfg.domain_seeds.string();
  j["domain_topics"] = cfg.domain_topics;
  Json v;
  v["top_k_entities"] = cfg.retrieval.top_k_entities;
  v["top_k_relations"] = cfg.retrieval.top_k_relations;
  v["p_hallucinate_entity"] = cfg.noise.p_hallucinate_entity;
  v["p_hallucinate_edge"] = cfg.noise.p_hallucinate_edge;
  v["p_drop_item"] = cfg.noise.p_drop_item;
  v["p_placeholder"] = cfg.noise.p_placeholder;
  if (cfg.noise_seed_set) v["noise_seed"] = cfg.noise.rng_seed;
  j["victim"] = std::move(v);
  const PlannerConfig& p = cfg.planner;
  j["planner"] = Json{{"epsilon_init", p.epsilon_init},
                      {"epsilon_min", p.epsilon_min},
                      {"gamma", p.gamma},
                      {"tau_init", p.tau_init},
                      {"window_k", p.window_k},
                      {"failure_override", p.failure_override},
                      {"fail_rate", p.fail_rate},
                      {"fail_window", p.fail_window},
                      {"fail_min_explores", p.fail_min_explores},
                      {"lambda", p.lambda},
                      {"beta_new", p.beta_new},
                      {"beta_old", p.beta_old}};
  j["strategy"] = ToString(cfg.strategy);
  j["filter"] = ToString(cfg.filter);
  const FilterConfig& f = cfg.filter_config;
  j["filter_config"] = Json{{"leniency", ToString(f.leniency)},
                            {"hub_threshold_factor", f.hub_threshold_factor},
                            {"per_turn_new_edge_spike", f.per_turn_new_edge_spike},
                            {"generic_terms", f.generic_terms},
                            {"placeholder_terms", f.placeholder_terms}};
  j["querygen"] = ToString(cfg.querygen);
  const GatewayConfig& g = cfg.gateway;
  j["gateway"] = Json{{"endpoint", g.endpoint},
                      {"model_name", g.model_name},
                      {"api_key_env", g.api_key_env},
                      {"temperature", g.temperature},
                      {"max_tokens", g.max_tokens},
                      {"timeout_ms", g.timeout.count()},
                      {"max_retries", g.max_retries},
                      {"backoff_base_ms", g.backoff_base.count()}};
  j["seed_query"] = cfg.seed_query ? Json(*cfg.seed_query) : Json(nullptr);
  j["output_dir"] = cfg.output_dir.string();
  j["rng_seed"] = cfg.rng_seed;
  j["directed_edges"] = cfg.directed_edges;
  j["track_raw_curves"] = cfg.track_raw_curves;
  return j.dump(2) + "\n";
}

KnowledgeGraph LoadTruth(const RunConfig& cfg) {
  if (!cfg.dataset.empty()) return LoadKnowledgeGraph(cfg.dataset).graph;
  if (cfg.synthetic) return Generate(*cfg.synthetic);
  throw ConfigError("config needs a dataset path or a synthetic spec");
}

std::vector<std::string> LoadTopics(const RunConfig& cfg) {
  if (!cfg.domain_seeds.empty()) return LoadDomainSeeds(cfg.domain_seeds.string());
  if (!cfg.domain_topics.empty()) return cfg.domain_topics;
  if (cfg.synthetic) return SynthTopics();
  return {};
}

std::string GraphFingerprint(const KnowledgeGraph& graph) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : SerializeKnowledgeGraph(graph)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult RunAttack(const RunConfig& cfg, const RunOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  Session s;
  InitSession(s, cfg, opts.log);
  const WarningSink warn = MakeSink(opts.log);
  const fs::path dir = s.cfg.output_dir;
  fs::create_directories(dir);

  const fs::path turns_path = dir / "turns.jsonl";
  const fs::path oracle_path = dir / "oracle.jsonl";
  const fs::path checkpoint_path = dir / "checkpoint.json";

  std::shared_ptr<Victim> victim = opts.victim;
  if (!victim) {
    victim = std::make_shared<SimulatedVictim>(s.truth, s.cfg.retrieval, s.cfg.noise);
  }

  const bool needs_gateway =
      s.cfg.filter == FilterKind::kLlm || s.cfg.querygen == QueryGenKind::kLlm;
  std::unique_ptr<TranscriptWriter> transcript;
  std::unique_ptr<LlmGateway> gateway;
  if (needs_gateway) {
    transcript = std::make_unique<TranscriptWriter>(dir / "transcript.jsonl");
    std::shared_ptr<ChatTransport> transport = opts.transport;
    if (!transport) transport = std::make_shared<HttpTransport>();
    gateway = std::make_unique<LlmGateway>(s.cfg.gateway, transport,
                                           transcript.get(), opts.sleeper);
  }

  RunResult result;
  auto filter_turn = [&](const ParsedCandidates& parsed,
                         const std::string& response) -> FilterVerdicts {
    if (s.cfg.filter == FilterKind::kNone) return KeepAll(parsed);
    const FilterContext ctx =
        MakeFilterContext(response, s.mem.graphs.filtered, s.cfg.filter_config);
    if (s.cfg.filter == FilterKind::kLlm) {
      FilterVerdicts v = FilterLlm(parsed, ctx, *gateway);
      if (v.downgraded) {
        Bump(s.counters, "filter_downgrades");
        if (warn) warn("filter model unavailable: " + v.downgrade_reason);
      }
      return v;
    }
    return FilterRuleBased(parsed, ctx);
  };
  auto measure = [&](int turn) {
    s.curves.push_back(s.eval->Evaluate(s.mem.graphs.filtered, turn));
    if (s.cfg.track_raw_curves) {
      s.raw_curves.push_back(s.eval->Evaluate(s.mem.graphs.raw, turn));
    }
  };

  const bool resuming = opts.resume && fs::exists(checkpoint_path);
  if (resuming) {
    RestoreCheckpoint(s, Json::parse(ReadFile(checkpoint_path)));
    const int done = s.mem.query.turn;
    TruncateJsonl(turns_path, done);
    TruncateJsonl(oracle_path, done);
    // Curves up to the checkpoint come back from the logs.
    if (fs::exists(dir / "seed_turn.json")) {
      const Json seed = Json::parse(ReadFile(dir / "seed_turn.json"));
      s.curves.push_back(MetricsFromJson(seed.at("metrics"), 0));
      if (s.cfg.track_raw_curves) {
        s.raw_curves.push_back(MetricsFromJson(seed.at("raw_metrics"), 0));
      }
    } else {
      s.curves.push_back(s.eval->Evaluate(KnowledgeGraph{}, 0));
      if (s.cfg.track_raw_curves) s.raw_curves.push_back(s.curves.back());
    }
    for (const Json& rec : ReadJsonl(turns_path)) {
      const int t = rec.at("turn").get<int>();
      s.curves.push_back(MetricsFromJson(rec.at("metrics"), t));
      if (s.cfg.track_raw_curves) {
        s.raw_curves.push_back(MetricsFromJson(rec.at("raw_metrics"), t));
      }
    }
  } else {
    for (const char* name : {"turns.jsonl", "oracle.jsonl", "seed_turn.json",
                             "checkpoint.json", "transcript.jsonl"}) {
      if (name == std::string("transcript.jsonl") && transcript) continue;
      fs::remove(dir / name);
    }
    WriteFileAtomic(dir / "config.json", SerializeRunConfig(s.cfg));

    if (s.cfg.seed_query) {
      const std::string full = AppendCommand(*s.cfg.seed_query);
      VictimResponse resp;
      try {
        resp = victim->Query(full, 0);
      } catch (const std::exception& e) {
        throw RunError(std::string("victim failed on the seed query: ") + e.what());
      }
      ++result.victim_queries;
      const ParsedCandidates parsed = Parse(resp.text);
      const FilterVerdicts verdicts = filter_turn(parsed, resp.text);
      CommitSeed(s.mem, parsed, verdicts);
      measure(0);
      Json rec;
      rec["turn"] = 0;
      rec["query"] = full;
      rec["response"] = resp.text;
      rec["parsed"] = ItemSets(parsed.graph);
      rec["kept"] = ItemSets(verdicts.kept);
      rec["discarded"] = DiscardsJson(verdicts);
      rec["metrics"] = MetricsJson(s.curves.back());
      if (s.cfg.track_raw_curves) rec["raw_metrics"] = MetricsJson(s.raw_curves.back());
      WriteFileAtomic(dir / "seed_turn.json", rec.dump() + "\n");
    } else {
      measure(0);
    }
    WriteFileAtomic(checkpoint_path, CheckpointText(s));
  }

  std::ofstream turns_out(turns_path, std::ios::app | std::ios::binary);
  std::ofstream oracle_out(oracle_path, std::ios::app | std::ios::binary);
  if (!turns_out || !oracle_out) throw RunError("cannot open logs in " + dir.string());

  while (s.mem.query.turn < s.cfg.budget) {
    if (opts.stop_after && s.mem.query.turn >= *opts.stop_after) break;
    const int t = s.mem.query.turn + 1;
    QueryMemory& q = s.mem.query;

    // Mode.
    ModeDecision decision;
    decision.epsilon_used = q.epsilon;
    decision.tau_used = Tau(s.cfg.planner, q.epsilon);
    decision.n_bar = RecentNovelty(q, s.cfg.planner.window_k);
    switch (s.cfg.strategy) {
      case Strategy::kAdaptive:
        decision = SelectMode(q, s.cfg.planner, s.rng);
        break;
      case Strategy::kExploitOnly:
        decision.mode = QueryMode::kExploit;
        break;
      case Strategy::kExploreOnly:
      case Strategy::kStaticBaseline:
        decision.mode = QueryMode::kExplore;
        break;
    }
    QueryMode mode = decision.mode;
    std::optional<std::string> target;
    bool exploit_fallback = false;
    if (mode == QueryMode::kExploit) {
      target = SampleExploitTarget(s.mem.graphs.filtered, q, s.cfg.planner, s.rng);
      if (!target) {
        mode = QueryMode::kExplore;
        exploit_fallback = true;
        Bump(s.counters, "exploit_fallbacks");
      }
    }
    if (decision.forced_by_failure) Bump(s.counters, "forced_exploits");
    Bump(s.counters, mode == QueryMode::kExplore ? "explore_turns" : "exploit_turns");

    // Query.
    QueryPlan plan;
    if (s.cfg.strategy == Strategy::kStaticBaseline) {
      plan.mode = QueryMode::kExplore;
      plan.topic = s.topics.empty()
                       ? std::string(kDefaultTopic)
                       : s.topics[static_cast<std::size_t>(t - 1) % s.topics.size()];
      plan.text = ExploreText(plan.topic);
      plan.full_text = AppendCommand(plan.text);
    } else if (s.cfg.querygen == QueryGenKind::kLlm) {
      plan = GenerateLlm(mode, s.mem.graphs.filtered, q, target, *gateway, *s.tgen,
                         s.cfg.dataset_name, warn);
      if (plan.fallback) Bump(s.counters, "query_fallbacks");
    } else {
      plan = s.tgen->Generate(mode, s.mem.graphs.filtered, q, target);
    }

    // Victim.
    VictimResponse resp;
    try {
      resp = victim->Query(plan.full_text, t);
    } catch (const std::exception& e) {
      throw RunError("victim failed at turn " + std::to_string(t) + ": " + e.what() +
                     "; the run can resume from turn " + std::to_string(t - 1));
    }
    ++result.victim_queries;

    // Stage A, then novelty against the raw graph as it stood before this
    // turn (the update itself happens in CommitTurn).
    const ParsedCandidates parsed = Parse(resp.text);
    const double novelty = Novelty(parsed.graph, s.mem.graphs.raw);

    // Stage B and memory update.
    const FilterVerdicts verdicts = filter_turn(parsed, resp.text);
    const CommitResult commit =
        CommitTurn(s.mem, parsed, verdicts, novelty, mode, plan.text, plan.topic, target);
    measure(t);
    AdvanceEpsilon(s.cfg.planner, q);

    Json rec;
    rec["turn"] = t;
    rec["strategy"] = ToString(s.cfg.strategy);
    rec["mode"] = ToString(mode);
    rec["decision"] = DecisionJson(decision);
    rec["decided_mode"] = ToString(decision.mode);
    rec["exploit_fallback"] = exploit_fallback;
    rec["target"] = target ? Json(*target) : Json(nullptr);
    rec["round"] = plan.round;
    rec["topic"] = plan.topic;
    rec["query"] = plan.full_text;
    rec["query_fallback"] = plan.fallback;
    rec["response"] = resp.text;
    rec["victim_fallback"] = resp.fallback;
    rec["parsed"] = ItemSets(parsed.graph);
    rec["parse_rejects"] = parsed.reject_count;
    rec["novelty"] = novelty;
    rec["kept"] = ItemSets(verdicts.kept);
    rec["discarded"] = DiscardsJson(verdicts);
    rec["filter_downgraded"] = verdicts.downgraded;
    rec["new_filtered_entities"] = commit.new_filtered_entities;
    rec["new_filtered_relations"] = commit.new_filtered_relations;
    rec["epsilon_next"] = q.epsilon;
    rec["metrics"] = MetricsJson(s.curves.back());
    if (s.cfg.track_raw_curves) rec["raw_metrics"] = MetricsJson(s.raw_curves.back());
    AppendLine(turns_out, rec);

    if (!resp.fabricated_entities.empty() || !resp.fabricated_relations.empty()) {
      Json orc;
      orc["turn"] = t;
      Json fakes = Json::array();
      for (const Fabrication& f : resp.fabricated_entities) {
        fakes.push_back(Json{{"id", f.oracle_id}, {"name", f.name}});
      }
      orc["fabricated_entities"] = std::move(fakes);
      Json rels = Json::array();
      for (const EdgeKey& k : resp.fabricated_relations) {
        rels.push_back(Json::array({k.first, k.second}));
      }
      orc["fabricated_relations"] = std::move(rels);
      AppendLine(oracle_out, orc);
    }
    WriteFileAtomic(checkpoint_path, CheckpointText(s));
  }

  result.turns_done = s.mem.query.turn;
  result.complete = s.mem.query.turn >= s.cfg.budget;
  result.filtered = s.mem.graphs.filtered;
  result.raw = s.mem.graphs.raw;
  result.curves = s.curves;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (result.complete) {
    WriteCurvesFile(dir / "curves.csv", s.curves);
    if (s.cfg.track_raw_curves) WriteCurvesFile(dir / "curves_raw.csv", s.raw_curves);
    SaveKnowledgeGraph(s.mem.graphs.filtered, dir / "extracted.json");
    SaveKnowledgeGraph(s.mem.graphs.raw, dir / "extracted_raw.json");
    WriteFileAtomic(dir / "summary.json", SummaryText(s, result));
  }
  return result;
}

ReplayReport ReplayRun(const fs::path& run_dir) {
  ReplayReport report;
  auto note = [&](int turn, const std::string& what) {
    if (report.details.size() < 20) {
      report.details.push_back("turn " + std::to_string(turn) + ": " + what);
    }
  };

  const RunConfig cfg = ParseRunConfig(ReadFile(run_dir / "config.json"));
  Session s;
  InitSession(s, cfg, nullptr);

  auto refilter = [&](const ParsedCandidates& parsed, const std::string& response,
                      const Json& logged_kept, int turn) -> FilterVerdicts {
    FilterVerdicts v;
    v.kept = KeptFromSets(parsed.graph, logged_kept);
    if (cfg.filter == FilterKind::kRule) {
      const FilterVerdicts again = FilterRuleBased(
          parsed, MakeFilterContext(response, s.mem.graphs.filtered, cfg.filter_config));
      if (ItemSets(again.kept) != logged_kept) {
        ++report.filter_mismatches;
        note(turn, "rule filter verdicts differ from the log");
      }
      return again;
    }
    if (cfg.filter == FilterKind::kNone && ItemSets(parsed.graph) != logged_kept) {
      ++report.filter_mismatches;
      note(turn, "unfiltered run kept a different set than it parsed");
    }
    return v;
  };

  auto check_metrics = [&](const Json& logged, int turn) {
    const MetricReport now = s.eval->Evaluate(s.mem.graphs.filtered, turn);
    if (!SameMetrics(now, MetricsFromJson(logged, turn))) {
      ++report.metric_mismatches;
      note(turn, "metrics differ from the log");
    }
  };

  if (fs::exists(run_dir / "seed_turn.json")) {
    const Json seed = Json::parse(ReadFile(run_dir / "seed_turn.json"));
    const std::string response = seed.at("response").get<std::string>();
    const ParsedCandidates parsed = Parse(response);
    const FilterVerdicts v = refilter(parsed, response, seed.at("kept"), 0);
    CommitSeed(s.mem, parsed, v);
    check_metrics(seed.at("metrics"), 0);
  }

  for (const Json& rec : ReadJsonl(run_dir / "turns.jsonl")) {
    const int t = rec.at("turn").get<int>();
    ++report.turns;
    QueryMemory& q = s.mem.query;
    if (q.turn + 1 != t) {
      ++report.mode_mismatches;
      note(t, "turn indices are not contiguous");
    }

    // Mode decision from memory and the replayed generator.
    const Json& logged = rec.at("decision");
    QueryMode decided;
    if (cfg.strategy == Strategy::kAdaptive) {
      const ModeDecision d = SelectMode(q, cfg.planner, s.rng);
      decided = d.mode;
      const bool same = d.z_draw == logged.at("z_draw").get<bool>() &&
                        d.b_indicator == logged.at("b_indicator").get<bool>() &&
                        d.forced_by_failure == logged.at("forced_by_failure").get<bool>() &&
                        d.n_bar == logged.at("n_bar").get<double>() &&
                        d.tau_used == logged.at("tau").get<double>() &&
                        d.epsilon_used == logged.at("epsilon").get<double>();
      if (!same) {
        ++report.mode_mismatches;
        note(t, "planner inputs differ from the log");
      }
    } else {
      decided = cfg.strategy == Strategy::kExploitOnly ? QueryMode::kExploit
                                                       : QueryMode::kExplore;
    }
    if (std::string(ToString(decided)) != rec.at("decided_mode").get<std::string>()) {
      ++report.mode_mismatches;
      note(t, "mode decision differs from the log");
    }
    QueryMode mode = decided;
    std::optional<std::string> target;
    if (mode == QueryMode::kExploit) {
      target = SampleExploitTarget(s.mem.graphs.filtered, q, cfg.planner, s.rng);
      if (!target) mode = QueryMode::kExplore;
    }
    const Json& logged_target = rec.at("target");
    if (std::string(ToString(mode)) != rec.at("mode").get<std::string>() ||
        (target ? Json(*target) : Json(nullptr)) != logged_target) {
      ++report.target_mismatches;
      note(t, "exploit target differs from the log");
    }

    // Query text, when it came from the deterministic generators.
    std::string query_text;
    std::string topic = rec.at("topic").get<std::string>();
    const std::string logged_query = rec.at("query").get<std::string>();
    const bool templated = cfg.querygen == QueryGenKind::kTemplate ||
                           rec.at("query_fallback").get<bool>();
    bool regenerated = true;
    if (cfg.strategy == Strategy::kStaticBaseline) {
      topic = s.topics.empty()
                  ? std::string(kDefaultTopic)
                  : s.topics[static_cast<std::size_t>(t - 1) % s.topics.size()];
      query_text = ExploreText(topic);
    } else if (templated) {
      const QueryPlan plan = s.tgen->Generate(mode, s.mem.graphs.filtered, q, target);
      query_text = plan.text;
      topic = plan.topic;
    } else {
      // Model-written query: the text is the log entry minus the command.
      regenerated = false;
      const std::string suffix = "\n\n" + std::string(prompts::kExtractionCommand);
      query_text = logged_query;
      if (query_text.size() >= suffix.size() &&
          query_text.compare(query_text.size() - suffix.size(), suffix.size(),
                             suffix) == 0) {
        query_text.resize(query_text.size() - suffix.size());
      }
    }
    if (regenerated && AppendCommand(query_text) != logged_query) {
      ++report.query_mismatches;
      note(t, "query text differs from the log");
    }

    // Stage A and novelty.
    const std::string response = rec.at("response").get<std::string>();
    const ParsedCandidates parsed = Parse(response);
    const double novelty = Novelty(parsed.graph, s.mem.graphs.raw);
    if (novelty != rec.at("novelty").get<double>() ||
        ItemSets(parsed.graph) != rec.at("parsed")) {
      ++report.novelty_mismatches;
      note(t, "novelty or parsed candidates differ from the log");
    }

    const FilterVerdicts v = refilter(parsed, response, rec.at("kept"), t);
    CommitTurn(s.mem, parsed, v, novelty, mode, query_text, topic, target);
    check_metrics(rec.at("metrics"), t);
    AdvanceEpsilon(cfg.planner, q);
    if (q.epsilon != rec.at("epsilon_next").get<double>()) {
      ++report.epsilon_mismatches;
      note(t, "epsilon schedule differs from the log");
    }
  }
  return report;
}

std::vector<CompareRow> CompareRuns(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw RunError("no runs to compare");
  std::vector<CompareRow> rows;
  std::string fingerprint;
  for (const fs::path& dir : run_dirs) {
    const Json j = Json::parse(ReadFile(dir / "summary.json"));
    const std::string fp = j.at("truth_fingerprint").get<std::string>();
    if (rows.empty()) {
      fingerprint = fp;
    } else if (fp != fingerprint) {
      throw RunError("run " + dir.string() +
                     " was scored against a different truth graph");
    }
    CompareRow row;
    row.run = dir.filename().empty() ? dir.parent_path().filename().string()
                                     : dir.filename().string();
    row.strategy = j.at("strategy").get<std::string>();
    row.filter = j.at("filter").get<std::string>();
    row.final = MetricsFromJson(j.at("final"), j.at("turns").get<int>());
    row.l_bar = (row.final.leak_nodes + row.final.leak_edges) / 2.0;
    row.p_bar = (row.final.prec_nodes + row.final.prec_edges) / 2.0;
    rows.push_back(std::move(row));
  }
  for (CompareRow& row : rows) {
    row.delta_l_bar = row.l_bar - rows.front().l_bar;
    row.delta_p_bar = row.p_bar - rows.front().p_bar;
  }
  return rows;
}

void PrintCompareTable(std::ostream& out, const std::vector<CompareRow>& rows) {
  std::size_t run_width = 4;
  for (const CompareRow& r : rows) run_width = std::max(run_width, r.run.size() + 2);
  const int w = static_cast<int>(run_width);
  out << std::left << std::setw(w) << "run" << std::setw(16) << "strategy"
      << std::setw(7) << "filter" << std::right;
  for (const char* h : {"leak_nodes", "leak_edges", "prec_nodes", "prec_edges",
                        "leak_deg", "leak_pr", "l_bar", "p_bar", "d_l_bar",
                        "d_p_bar"}) {
    out << std::setw(11) << h;
  }
  out << "\n" << std::fixed << std::setprecision(2);
  for (const CompareRow& r : rows) {
    out << std::left << std::setw(w) << r.run << std::setw(16) << r.strategy
        << std::setw(7) << r.filter << std::right;
    for (double v : {r.final.leak_nodes, r.final.leak_edges, r.final.prec_nodes,
                     r.final.prec_edges, r.final.leak_deg, r.final.leak_pr,
                     r.l_bar, r.p_bar, r.delta_l_bar, r.delta_p_bar}) {
      out << std::setw(11) << v;
    }
    out << "\n";
  }
}

}  // namespace kgleak
