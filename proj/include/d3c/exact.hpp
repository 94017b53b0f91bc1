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

#ifndef D3C_EXACT_HPP_
#define D3C_EXACT_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "d3c/games.hpp"
#include "d3c/mixing.hpp"
#include "d3c/poa.hpp"
#include "d3c/record.hpp"

namespace d3c {

struct ExactConfig {
  double dt = 0.05;
  double eta_a = 1.0;
  double nu = 0.0;
  double epsilon = 0.0;
  int steps = 1000;
  LogitBounds bounds;
};

struct JointState {
  Eigen::VectorXd x;
  Eigen::MatrixXd A;
  int step = 0;
};

// Everything the update needs at one state, computed once.
struct MixedParts {
  Eigen::VectorXd f;   // raw losses
  Eigen::MatrixXd J;   // row j: grad_x f_j
  Eigen::MatrixXd JA;  // row i: grad_x f_i^A = sum_j A_ji grad_x f_j
  Eigen::VectorXd xdot;  // block k: -grad_{x_k} f_k^A
};

MixedParts mixed_parts(const Game& game, const Eigen::VectorXd& x,
                       const Eigen::MatrixXd& A);

// Concatenated own-block gradients grad_{x_i} f_i^A.
Eigen::VectorXd mixed_grads(const Game& game, const Eigen::VectorXd& x,
                            const Eigen::MatrixXd& A);

// x - dt * mixed_grads, then the game's domain projection.
Eigen::VectorXd strategy_step(const Game& game, const JointState& state,
                              double dt);

// d/dt f_i^A along the simultaneous descent flow.
double ddt_mixed_loss(const Game& game, const Eigen::VectorXd& x,
                      const Eigen::MatrixXd& A, int i);

// Gradient of ReLU(d/dt f_i^A + epsilon) with respect to row A_i.
Eigen::VectorXd grad_a_surrogate(const Game& game, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& A, int i,
                                 double epsilon);
Eigen::VectorXd grad_a_surrogate(const Game& game, const MixedParts& parts,
                                 const Eigen::MatrixXd& A, int i,
                                 double epsilon);

// Players listed in `frozen` keep both their strategy and their mixing row.
JointState d3c_exact_step(const Game& game, const JointState& state,
                          const ExactConfig& cfg,
                          const std::vector<bool>& frozen = {});

LocalSnapshot local_snapshot(const Game& game, const MixedParts& parts,
                             const Eigen::MatrixXd& A);

using StrategySampler =
    std::function<Eigen::VectorXd(const Game&, std::mt19937_64&)>;

StrategySampler standard_normal_sampler();
StrategySampler uniform_sampler(double lo, double hi);

struct ExactRunOptions {
  int log_every = 0;  // 0 logs only the first and last step
  bool identity_mixing = false;  // gradient-descent baseline
  // Non-empty: A is held at this matrix (e.g. uniform for the cooperative
  // baseline). Takes precedence over identity_mixing.
  Eigen::MatrixXd fixed_mixing;
  double a0 = 0.99;
  std::vector<bool> frozen;
  // Applied to the sampled start (e.g. to pin frozen players).
  std::function<void(Eigen::VectorXd&)> init_hook;
};

struct ExactRunResult {
  RunRecord record;
  JointState final_state;
};

// Seeded, deterministic run of D3C (or the baseline when eta_a = 0 and
// identity mixing is requested).
ExactRunResult run_exact(const Game& game, const ExactConfig& cfg,
                         const StrategySampler& sampler, std::uint64_t seed,
                         const ExactRunOptions& opts = {});

}  // namespace d3c

#endif  // D3C_EXACT_HPP_
