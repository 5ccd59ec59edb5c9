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

// Command-line front end: run, eval, compare, replay, gen-synthetic and
// experiment.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgleak/evaluator.h"
#include "kgleak/harness.h"
#include "kgleak/kg.h"
#include "kgleak/synthgen.h"

namespace {

namespace fs = std::filesystem;
using kgleak::RunConfig;

void PrintRun(const kgleak::RunResult& r) {
  const kgleak::MetricReport& m = r.curves.back();
  std::cout << "turns " << r.turns_done << (r.complete ? "" : " (incomplete)")
            << "  leak_nodes " << m.leak_nodes << "  leak_edges " << m.leak_edges
            << "  prec_nodes " << m.prec_nodes << "  prec_edges " << m.prec_edges
            << "  leak_deg " << m.leak_deg << "  leak_pr " << m.leak_pr << "\n";
}

int CmdRun(const std::string& config_path, bool resume,
           const std::string& output_dir, const std::vector<std::uint64_t>& seed,
           int budget) {
  RunConfig cfg = kgleak::LoadRunConfig(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (!seed.empty()) cfg.rng_seed = seed.front();
  if (budget > 0) cfg.budget = budget;
  kgleak::RunOptions opts;
  opts.resume = resume;
  opts.log = &std::cerr;
  PrintRun(kgleak::RunAttack(cfg, opts));
  return 0;
}

int CmdExperiment(const std::string& config_path,
                  const std::vector<std::uint64_t>& seeds, int jobs) {
  const RunConfig base = kgleak::LoadRunConfig(config_path);
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex out_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      RunConfig cfg = base;
      cfg.rng_seed = seeds[i];
      cfg.output_dir = base.output_dir / ("seed_" + std::to_string(seeds[i]));
      try {
        const kgleak::RunResult r = kgleak::RunAttack(cfg);
        std::lock_guard<std::mutex> lock(out_mu);
        std::cout << "seed " << seeds[i] << ": ";
        PrintRun(r);
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard<std::mutex> lock(out_mu);
        std::cerr << "seed " << seeds[i] << " failed: " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return failures == 0 ? 0 : 1;
}

int CmdEval(const std::string& truth_path, const std::string& extracted_path,
            bool directed) {
  const kgleak::KnowledgeGraph truth = kgleak::LoadKnowledgeGraph(truth_path).graph;
  const kgleak::KnowledgeGraph extracted =
      kgleak::LoadKnowledgeGraph(extracted_path).graph;
  const kgleak::Evaluator eval(truth, kgleak::MatchOptions{directed});
  const kgleak::MetricReport r = eval.Evaluate(extracted, 0);
  nlohmann::ordered_json j;
  j["leak_nodes"] = r.leak_nodes;
  j["leak_edges"] = r.leak_edges;
  j["prec_nodes"] = r.prec_nodes;
  j["prec_edges"] = r.prec_edges;
  j["leak_deg"] = r.leak_deg;
  j["leak_pr"] = r.leak_pr;
  j["empty_extraction"] = r.empty_nodes;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int CmdCompare(const std::vector<std::string>& dirs) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  kgleak::PrintCompareTable(std::cout, kgleak::CompareRuns(paths));
  return 0;
}

int CmdReplay(const std::string& dir) {
  const kgleak::ReplayReport r = kgleak::ReplayRun(dir);
  std::cout << "turns " << r.turns << "  mismatches " << r.total()
            << " (mode " << r.mode_mismatches << ", target " << r.target_mismatches
            << ", query " << r.query_mismatches << ", novelty "
            << r.novelty_mismatches << ", filter " << r.filter_mismatches
            << ", metrics " << r.metric_mismatches << ", epsilon "
            << r.epsilon_mismatches << ")\n";
  for (const std::string& d : r.details) std::cout << "  " << d << "\n";
  return r.total() == 0 ? 0 : 1;
}

int CmdGenerate(const std::string& model, std::size_t nodes, std::size_t edges,
                std::uint64_t seed, const std::string& out,
                const std::string& topics_out) {
  kgleak::SynthSpec spec;
  spec.model = kgleak::ParseSynthModel(model);
  spec.n_nodes = nodes;
  spec.n_edges = spec.model == kgleak::SynthModel::kStar ? nodes - 1 : edges;
  spec.seed = seed;
  const kgleak::KnowledgeGraph g = kgleak::Generate(spec);
  if (out.empty() || out == "-") {
    std::cout << kgleak::SerializeKnowledgeGraph(g);
  } else {
    kgleak::SaveKnowledgeGraph(g, out);
  }
  if (!topics_out.empty()) {
    std::ofstream t(topics_out);
    for (const std::string& topic : kgleak::SynthTopics()) t << topic << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph extraction attack lab"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  bool resume = false;
  int budget = 0;
  auto* run = app.add_subcommand("run", "Run one attack");
  run->add_option("--config", config, "Run config (JSON)")->required();
  run->add_flag("--resume", resume, "Continue from the output dir's checkpoint");
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--seed", seeds, "Override rng_seed")->expected(1);
  run->add_option("--budget", budget, "Override the query budget");

  int jobs = 1;
  auto* exp = app.add_subcommand("experiment", "Run one config over several seeds");
  exp->add_option("--config", config, "Run config (JSON)")->required();
  exp->add_option("--seeds", seeds, "Seeds")->required()->delimiter(',');
  exp->add_option("--jobs", jobs, "Concurrent runs");

  std::string truth;
  std::string extracted;
  bool directed = false;
  auto* eval = app.add_subcommand("eval", "Score an extracted graph");
  eval->add_option("--truth", truth, "Truth graph")->required();
  eval->add_option("--extracted", extracted, "Extracted graph")->required();
  eval->add_flag("--directed", directed, "Match edges by direction");

  std::vector<std::string> dirs;
  auto* compare = app.add_subcommand("compare", "Compare finished runs");
  compare->add_option("dirs", dirs, "Run directories; the first is the default")
      ->required();

  std::string replay_dir;
  auto* replay = app.add_subcommand("replay", "Recompute a run from its log");
  replay->add_option("dir", replay_dir, "Run directory")->required();

  std::string model = "ba";
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint64_t gen_seed = 0;
  std::string out;
  std::string topics_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic truth graph");
  gen->add_option("--nodes", nodes, "Node count")->required();
  gen->add_option("--edges", edges, "Edge count (ignored for star)");
  gen->add_option("--model", model, "star | er | ba");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", out, "Output file, - for stdout");
  gen->add_option("--topics-out", topics_out, "Also write the topic word list");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return CmdRun(config, resume, output_dir, seeds, budget);
    if (*exp) return CmdExperiment(config, seeds, jobs);
    if (*eval) return CmdEval(truth, extracted, directed);
    if (*compare) return CmdCompare(dirs);
    if (*replay) return CmdReplay(replay_dir);
    if (*gen) return CmdGenerate(model, nodes, edges, gen_seed, out, topics_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
