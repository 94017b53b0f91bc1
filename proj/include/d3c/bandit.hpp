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

#ifndef D3C_BANDIT_HPP_
#define D3C_BANDIT_HPP_

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "d3c/mixing.hpp"
#include "d3c/record.hpp"

namespace d3c {

struct BanditConfig {
  double eta_a = 1.0;
  double delta = 1.0;
  double nu = 0.0;
  int tau_min = 10;
  int tau_max = 20;
  double a0 = 0.99;
  double epsilon = 0.0;
  LogitBounds bounds;

  void validate() const;

  static BanditConfig trust_your_brother();
  static BanditConfig coins();
};

struct TrialState {
  Eigen::VectorXd perturbed_row;
  Eigen::VectorXd direction;
  int tau = 0;
  int t_begin = 0;
  double g_begin = 0.0;
};

struct BanditAgentState {
  int owner = 0;
  Eigen::VectorXd row;
  TrialState trial;
  double g_mean = 0.0;
  double last_rho = 0.0;  // most recent one-shot estimate
};

TrialState start_trial(const Eigen::VectorXd& row, const BanditConfig& cfg,
                       int step, double g_mean, std::mt19937_64& rng);

// Running mean of returns since the trial began.
void record_return(BanditAgentState& state, double g, int step);

inline bool trial_complete(const BanditAgentState& s, int step) {
  return step - s.trial.t_begin == s.trial.tau;
}

// rho = ReLU((G_b - G)/tau + eps); mirror step on rho*a - nu e_i/A_i;
// then a fresh trial. Throws std::logic_error if the trial is not complete.
void finish_trial(BanditAgentState& state, const BanditConfig& cfg, int step,
                  std::mt19937_64& rng);

// Agents with rows from init_mixing(n, cfg.a0) and their first trial drawn.
std::vector<BanditAgentState> init_bandit_agents(int n,
                                                 const BanditConfig& cfg,
                                                 std::mt19937_64& rng);

// A learning process shared by n agents. One call runs one learning
// iteration for all agents using the perturbed rows, with rewards mixed as
// r~_i = sum_j A~_ji r_j, and returns each agent's mean mixed return.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual int num_agents() const = 0;
  virtual Eigen::VectorXd step(const Eigen::MatrixXd& perturbed) = 0;
  // Mean raw (unmixed) returns of the last step.
  virtual Eigen::VectorXd raw_returns() const = 0;
  // Worst relative gap between raw and mixed reward totals so far.
  virtual double max_budget_error() const = 0;
};

struct BanditRunOptions {
  int log_every = 1;  // 0 logs only the last step
  bool learn_mixing = true;  // false runs the learner with fixed rows
  Eigen::MatrixXd fixed_mixing;  // rows used when !learn_mixing; empty = I
  int first_step = 1;  // resume a run: steps first_step..first_step+iterations-1
  // Called after every learning step.
  std::function<void(int step, const Learner&)> on_step;
};

RunRecord run_bandit(std::vector<BanditAgentState>& agents, Learner& learner,
                     const BanditConfig& cfg, int iterations,
                     std::mt19937_64& rng, const BanditRunOptions& opts = {});

}  // namespace d3c

#endif  // D3C_BANDIT_HPP_
