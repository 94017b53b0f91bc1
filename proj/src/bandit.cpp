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

#include "d3c/bandit.hpp"

#include <stdexcept>

namespace d3c {

void BanditConfig::validate() const {
  if (!(tau_min >= 1 && tau_min <= tau_max))
    throw std::invalid_argument("bandit: need 1 <= tau_min <= tau_max");
  if (!(delta > 0.0)) throw std::invalid_argument("bandit: delta must be > 0");
  if (!(eta_a >= 0.0) || !(nu >= 0.0))
    throw std::invalid_argument("bandit: eta_a and nu must be >= 0");
  if (!(bounds.l < bounds.h)) throw std::invalid_argument("bandit: l >= h");
}

BanditConfig BanditConfig::trust_your_brother() {
  BanditConfig c;
  c.eta_a = 1.0;
  c.delta = 1.0;
  c.nu = 0.0;
  c.tau_min = 10;
  c.tau_max = 20;
  c.a0 = 0.99;
  c.epsilon = 0.0;
  return c;
}

BanditConfig BanditConfig::coins() {
  BanditConfig c;
  c.eta_a = 1e-3;
  c.delta = 0.1;
  c.nu = 1e-6;
  c.tau_min = 5;
  c.tau_max = 10;
  c.a0 = 0.99;
  c.epsilon = 100.0;
  return c;
}

TrialState start_trial(const Eigen::VectorXd& row, const BanditConfig& cfg,
                       int step, double g_mean, std::mt19937_64& rng) {
  TrialState t;
  auto [perturbed, direction] = perturb_trial(row, cfg.delta, rng);
  t.perturbed_row = std::move(perturbed);
  t.direction = std::move(direction);
  t.tau = std::uniform_int_distribution<int>(cfg.tau_min, cfg.tau_max)(rng);
  t.t_begin = step;
  t.g_begin = g_mean;
  return t;
}

void record_return(BanditAgentState& s, double g, int step) {
  const int elapsed = step - s.trial.t_begin;
  if (elapsed < 1) throw std::logic_error("record_return: step not after t_b");
  s.g_mean = (s.g_mean * (elapsed - 1) + g) / elapsed;
}

void finish_trial(BanditAgentState& s, const BanditConfig& cfg, int step,
                  std::mt19937_64& rng) {
  if (!trial_complete(s, step))
    throw std::logic_error("finish_trial: trial not complete");
  const double rho =
      std::max(0.0, (s.trial.g_begin - s.g_mean) / s.trial.tau + cfg.epsilon);
  s.last_rho = rho;
  Eigen::VectorXd grad = rho * s.trial.direction;
  if (cfg.nu != 0.0) grad += cfg.nu * kl_anchor_grad(s.row, s.owner);
  if (!grad.isZero(0.0)) s.row = mirror_step(s.row, grad, cfg.eta_a, cfg.bounds);
  s.trial = start_trial(s.row, cfg, step, s.g_mean, rng);
}

std::vector<BanditAgentState> init_bandit_agents(int n,
                                                 const BanditConfig& cfg,
                                                 std::mt19937_64& rng) {
  cfg.validate();
  const Eigen::MatrixXd A = init_mixing<double>(n, cfg.a0);
  std::vector<BanditAgentState> agents(n);
  for (int i = 0; i < n; ++i) {
    agents[i].owner = i;
    agents[i].row = A.row(i).transpose();
    agents[i].g_mean = 0.0;
    agents[i].trial = start_trial(agents[i].row, cfg, 0, 0.0, rng);
  }
  return agents;
}

RunRecord run_bandit(std::vector<BanditAgentState>& agents, Learner& learner,
                     const BanditConfig& cfg, int iterations,
                     std::mt19937_64& rng, const BanditRunOptions& opts) {
  cfg.validate();
  const int n = learner.num_agents();
  if (static_cast<int>(agents.size()) != n)
    throw std::invalid_argument("run_bandit: agent count mismatch");
  RunRecord rec;
  Eigen::MatrixXd fixed = Eigen::MatrixXd::Identity(n, n);
  if (!opts.learn_mixing && opts.fixed_mixing.size()) {
    if (opts.fixed_mixing.rows() != n || !is_row_stochastic(opts.fixed_mixing))
      throw std::invalid_argument("run_bandit: fixed_mixing must be n x n stochastic");
    fixed = opts.fixed_mixing;
  }
  Eigen::MatrixXd perturbed(n, n);
  Eigen::MatrixXd rows(n, n);
  const int last = opts.first_step + iterations - 1;
  for (int t = opts.first_step; t <= last; ++t) {
    if (opts.learn_mixing) {
      for (int i = 0; i < n; ++i)
        perturbed.row(i) = agents[i].trial.perturbed_row.transpose();
    } else {
      perturbed = fixed;
    }
    const Eigen::VectorXd g = learner.step(perturbed);
    if (opts.learn_mixing) {
      for (int i = 0; i < n; ++i) {
        record_return(agents[i], g(i), t);
        if (trial_complete(agents[i], t)) finish_trial(agents[i], cfg, t, rng);
      }
    }
    if (opts.on_step) opts.on_step(t, learner);
    if ((opts.log_every > 0 && t % opts.log_every == 0) || t == last) {
      RecordRow row;
      row.step = t;
      row.value = learner.raw_returns();
      row.rho.resize(n);
      for (int i = 0; i < n; ++i) {
        row.rho(i) = agents[i].last_rho;
        if (opts.learn_mixing) rows.row(i) = agents[i].row.transpose();
        else rows.row(i) = fixed.row(i);
      }
      row.rho_max = row.rho.maxCoeff();
      row.A = rows;
      rec.rows.push_back(std::move(row));
    }
  }
  rec.max_budget_error = learner.max_budget_error();
  return rec;
}

}  // namespace d3c
