// Copyright 2026 The D3C Authors
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

// d3c <experiment> [options]: seeded experiment runner writing a CSV of raw
// records and a JSON summary.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d3c/config.hpp"
#include "d3c/experiments.hpp"

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  std::string algo;
  int runs = -1;
  int steps = -1;
  long long seed = -1;
  int threads = 0;
  bool full_scale = false;
  bool print_config = false;
  std::string csv_path;
  std::string summary_path;
  // Experiment shortcuts; negative or empty means "keep".
  int n = -1;
  double c = -1.0;
  int defectors = -1;
  bool no_shortcut = false;
  double delta = -1.0;
  double kappa = -1.0;
  double return_scale = -1.0;
};

// Experiments whose full-size version uses 1000 runs.
bool has_full_scale(const std::string& e) {
  return e == "pd" || e == "traffic" || e == "braess-batch" || e == "trust";
}

d3c::ExperimentConfig build_config(const std::string& experiment,
                                   const Options& o) {
  std::vector<std::pair<std::string, std::string>> file_items;
  std::string algo = o.algo;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw d3c::ConfigError("--config", "cannot read " + o.config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    const d3c::ExperimentConfig parsed = d3c::parse_config(ss.str());
    if (parsed.experiment != experiment)
      throw d3c::ConfigError("experiment", "config file is for '" +
                                               parsed.experiment + "'");
    if (algo.empty()) algo = parsed.algo;
    file_items = d3c::config_items(parsed);
  }
  d3c::ExperimentConfig cfg = d3c::default_config(experiment, algo);
  for (const auto& [k, v] : file_items) d3c::set_config_value(cfg, k, v);
  if (!o.algo.empty()) cfg.algo = o.algo;
  if (o.full_scale && has_full_scale(experiment)) cfg.runs = 1000;
  if (o.runs >= 0) cfg.runs = o.runs;
  if (o.steps >= 0) cfg.steps = o.steps;
  if (o.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(o.seed);
  } else if (const char* env = std::getenv("D3C_SEED")) {
    d3c::set_config_value(cfg, "seed", env);
  }
  if (o.n >= 0) cfg.pd_n = o.n;
  if (o.c >= 0) cfg.pd_c = o.c;
  if (o.defectors >= 0) cfg.pd_defectors = o.defectors;
  if (o.no_shortcut) cfg.traffic_shortcut = false;
  if (o.delta >= 0) cfg.braess_delta = o.delta;
  if (o.kappa >= 0) {
    if (experiment == "election") cfg.election_kappa_z = o.kappa;
    else cfg.game1_kappa = o.kappa;
  }
  if (o.return_scale >= 0) cfg.trust_return_scale = o.return_scale;
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw d3c::ConfigError("--set", "expected key=value, got '" + kv + "'");
    d3c::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  d3c::validate(cfg);
  return cfg;
}

void print_gates(const d3c::ExperimentResult& res) {
  for (const auto& g : res.gates)
    std::cerr << (g.passed ? "ok   " : "FAIL ") << g.name
              << " worst=" << d3c::format_double(g.value)
              << " tol=" << d3c::format_double(g.tolerance) << '\n';
}

int run(const std::string& experiment, const Options& o) {
  const d3c::ExperimentConfig cfg = build_config(experiment, o);
  if (o.print_config) {
    std::cout << d3c::emit_config(cfg);
    return 0;
  }
  const d3c::ExperimentResult res = d3c::run_experiment(cfg, o.threads);
  if (!o.csv_path.empty()) {
    std::ofstream out(o.csv_path);
    if (!out) throw std::runtime_error("cannot write " + o.csv_path);
    d3c::emit_records_csv(out, res);
  }
  if (o.summary_path.empty() || o.summary_path == "-") {
    d3c::emit_summary(std::cout, res);
  } else {
    std::ofstream out(o.summary_path);
    if (!out) throw std::runtime_error("cannot write " + o.summary_path);
    d3c::emit_summary(out, res);
  }
  print_gates(res);
  return res.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D3C experiment runner"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const std::string& id : d3c::experiment_ids()) {
    CLI::App* sub = app.add_subcommand(id, "run the " + id + " experiment");
    sub->add_option("--config", o.config_file, "flat key = value config file");
    sub->add_option("--set", o.sets, "override one key (key=value)");
    sub->add_option("--algo", o.algo,
                    "gd-baseline | d3c-exact | d3c-bandit | cooperative");
    sub->add_option("--runs", o.runs, "number of seeded runs");
    sub->add_option("--steps", o.steps, "training steps per run");
    sub->add_option("--seed", o.seed, "master seed (else $D3C_SEED, else 0)");
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
    sub->add_flag("--full-scale", o.full_scale, "1000 runs where applicable");
    sub->add_flag("--print-config", o.print_config,
                  "print the effective config and exit");
    sub->add_option("--csv", o.csv_path, "write raw records here");
    sub->add_option("--summary", o.summary_path, "JSON summary path (- = stdout)");
    if (id == "pd" || id == "reciprocity") {
      sub->add_option("--n", o.n, "players");
      sub->add_option("--c", o.c, "PD scale c");
      sub->add_option("--defectors", o.defectors, "players frozen at the origin");
    }
    if (id == "traffic")
      sub->add_flag("--no-shortcut", o.no_shortcut, "drop the A-B edge");
    if (id == "braess-batch")
      sub->add_option("--delta", o.delta, "generator margin");
    if (id == "game1" || id == "election")
      sub->add_option("--kappa", o.kappa, "game coupling");
    if (id == "trust")
      sub->add_option("--return-scale", o.return_scale,
                      "multiplier on returns seen by the bandit");
    subs.emplace_back(id, sub);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& [id, sub] : subs)
      if (sub->parsed()) return run(id, o);
  } catch (const d3c::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
