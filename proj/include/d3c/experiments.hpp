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

#ifndef D3C_EXPERIMENTS_HPP_
#define D3C_EXPERIMENTS_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "d3c/config.hpp"
#include "d3c/record.hpp"

namespace d3c {

inline constexpr double kBudgetTolerance = 1e-9;
inline constexpr double kGradTolerance = 1e-5;

inline std::uint64_t run_seed(std::uint64_t master, int run_id) {
  return master ^ static_cast<std::uint64_t>(run_id);
}

struct RunOutput {
  RunRecord record;
  // Per-run scalar results (final ratio, attention, basin hit, ...).
  std::map<std::string, double> extras;
  Eigen::VectorXd final_x;  // empty for learner experiments
  Eigen::MatrixXd final_A;
};

struct Stats {
  double mean = kNaN;
  double median = kNaN;
  double std = kNaN;  // population standard deviation
  int count = 0;
};

// NaN entries are skipped.
Stats summarize(const std::vector<double>& values);

struct MetricSeries {
  std::vector<int> steps;
  std::vector<Stats> stats;  // one per logged step, across runs
};

struct GateResult {
  std::string name;
  double value = 0.0;      // worst observed
  double tolerance = 0.0;
  bool passed = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunOutput> runs;  // ordered by run id
  std::map<std::string, MetricSeries> metrics;  // total, ratio, rho_max, attention
  std::map<std::string, Stats> extras;
  std::vector<GateResult> gates;

  bool passed() const;
};

// One seeded run; deterministic in (cfg, run_id).
RunOutput run_single(const ExperimentConfig& cfg, int run_id);

// All runs over a worker pool (threads <= 0: hardware concurrency). Output is
// independent of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

// Finite-difference gates over every game gradient and grad_a_surrogate at
// `points` random points per game.
std::vector<GateResult> run_gradcheck(std::uint64_t seed, int points);

void emit_records_csv(std::ostream& os, const ExperimentResult& result);
// JSON: config echo, build version, gates, per-metric series and final
// statistics, per-run extras statistics.
void emit_summary(std::ostream& os, const ExperimentResult& result);

// `git describe` of the source tree at configure time.
std::string build_version();

}  // namespace d3c

#endif  // D3C_EXPERIMENTS_HPP_
