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

#ifndef KGLEAK_HARNESS_H_
#define KGLEAK_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kgleak/evaluator.h"
#include "kgleak/filtering.h"
#include "kgleak/kg.h"
#include "kgleak/llm_gateway.h"
#include "kgleak/planner.h"
#include "kgleak/synthgen.h"
#include "kgleak/victim.h"

namespace kgleak {

enum class Strategy { kAdaptive, kExploreOnly, kExploitOnly, kStaticBaseline };
enum class FilterKind { kRule, kLlm, kNone };
enum class QueryGenKind { kTemplate, kLlm };

std::string_view ToString(Strategy s);
std::string_view ToString(FilterKind f);
std::string_view ToString(QueryGenKind q);
Strategy ParseStrategy(std::string_view text);
FilterKind ParseFilterKind(std::string_view text);
QueryGenKind ParseQueryGenKind(std::string_view text);

struct RunConfig {
  int budget = 100;
  // Truth graph: a kg JSON file, or a synthetic spec when the path is empty.
  std::filesystem::path dataset;
  std::optional<SynthSpec> synthetic;
  std::string dataset_name = "knowledge graph";
  // Explore topics: a file, an inline list, or the synthetic topic words.
  std::filesystem::path domain_seeds;
  std::vector<std::string> domain_topics;

  RetrievalConfig retrieval;
  NoiseConfig noise;
  bool noise_seed_set = false;  // else noise.rng_seed follows rng_seed
  PlannerConfig planner;
  Strategy strategy = Strategy::kAdaptive;
  FilterKind filter = FilterKind::kRule;
  FilterConfig filter_config;
  QueryGenKind querygen = QueryGenKind::kTemplate;
  GatewayConfig gateway;
  std::optional<std::string> seed_query;
  std::filesystem::path output_dir;
  std::uint64_t rng_seed = 0;
  bool directed_edges = false;   // strict-direction edge matching
  bool track_raw_curves = false;  // also write curves_raw.csv for the raw graph
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Validate(const RunConfig& cfg);

// JSON form of the config. Relative paths in a file are resolved against the
// file's directory.
RunConfig ParseRunConfig(std::string_view json_text,
                         const std::filesystem::path& base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path& path);
std::string SerializeRunConfig(const RunConfig& cfg);

// Truth graph and explore topics named by the config.
KnowledgeGraph LoadTruth(const RunConfig& cfg);
std::vector<std::string> LoadTopics(const RunConfig& cfg);

// 64-bit FNV-1a of the serialized graph, as 16 hex digits.
std::string GraphFingerprint(const KnowledgeGraph& graph);

struct RunOptions {
  // Test hooks. Defaults: SimulatedVictim over the truth, HttpTransport.
  std::shared_ptr<Victim> victim;
  std::shared_ptr<ChatTransport> transport;
  LlmGateway::Sleeper sleeper;
  // Continue from output_dir/checkpoint.json when present.
  bool resume = false;
  // Stop after this many committed turns without finishing the run.
  std::optional<int> stop_after;
  std::ostream* log = nullptr;  // warnings and progress
};

struct RunResult {
  KnowledgeGraph filtered;
  KnowledgeGraph raw;
  std::vector<MetricReport> curves;  // turn 0..T
  int turns_done = 0;
  int victim_queries = 0;            // issued during this call
  bool complete = false;
  double elapsed_seconds = 0.0;
};

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the attack loop and writes turns.jsonl, curves.csv, extracted.json,
// summary.json, config.json and checkpoint.json under cfg.output_dir. A
// victim failure leaves the last committed turn in the checkpoint and throws
// RunError.
RunResult RunAttack(const RunConfig& cfg, const RunOptions& opts = {});

struct ReplayReport {
  int turns = 0;
  int mode_mismatches = 0;
  int target_mismatches = 0;
  int query_mismatches = 0;     // template mode only
  int novelty_mismatches = 0;
  int filter_mismatches = 0;    // rule filter only
  int metric_mismatches = 0;
  int epsilon_mismatches = 0;
  std::vector<std::string> details;  // first few mismatch descriptions

  int total() const {
    return mode_mismatches + target_mismatches + query_mismatches +
           novelty_mismatches + filter_mismatches + metric_mismatches +
           epsilon_mismatches;
  }
};

// Recomputes decisions, novelty, filter verdicts and metrics of a finished
// run from its config and turn log, without contacting the victim.
ReplayReport ReplayRun(const std::filesystem::path& run_dir);

struct CompareRow {
  std::string run;
  std::string strategy;
  std::string filter;
  MetricReport final;
  double l_bar = 0.0;  // (leak_nodes + leak_edges) / 2
  double p_bar = 0.0;  // (prec_nodes + prec_edges) / 2
  double delta_l_bar = 0.0;
  double delta_p_bar = 0.0;
};

// Final metrics of each run with deltas against the first one. Throws
// RunError when the runs were scored against different truth graphs.
std::vector<CompareRow> CompareRuns(
    const std::vector<std::filesystem::path>& run_dirs);

void PrintCompareTable(std::ostream& out, const std::vector<CompareRow>& rows);

}  // namespace kgleak

#endif  // KGLEAK_HARNESS_H_
