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

#ifndef D3C_POA_HPP_
#define D3C_POA_HPP_

#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "d3c/games.hpp"

namespace d3c {

struct PoaConfig {
  double dt = 0.01;
  double mu_bar = std::numeric_limits<double>::infinity();
  double epsilon = 0.0;
};

struct LocalSnapshot {
  Eigen::VectorXd mixed_losses;      // f_i^A
  Eigen::VectorXd loss_rates;        // d/dt f_i^A
  Eigen::VectorXd own_grad_sqnorms;  // |grad_{x_i} f_i^A|^2
};

struct UtilitarianBound {
  Eigen::VectorXd per_agent;
  double max = 1.0;
};

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

// rho_i = 1 + dt * ReLU(rate_i / f_i + |g_i|^2 / (mu_bar f_i)).
// Throws std::domain_error on nonpositive losses; use rho_additive there.
UtilitarianBound local_poa_utilitarian(const LocalSnapshot& s,
                                       const PoaConfig& cfg);

// 1 + dt * ReLU(max_rate / max f + sum |g_i|^2 / (mu_bar max f)).
double local_poa_egalitarian(const LocalSnapshot& s, double max_loss_rate,
                             const PoaConfig& cfg);

// ReLU(rate + epsilon).
inline double rho_additive(double loss_rate, double epsilon) {
  return relu(loss_rate + epsilon);
}

// nash_total / opt_total when the game knows both.
std::optional<double> global_poa_closed(const Game& game);

inline double ratio_to_optimal(double total, double opt_total) {
  return total / opt_total;
}

// For reward games: optimal return over attained return. Both are expected
// to be negative (costs), so the ratio is attained/optimal in loss terms.
inline double ratio_to_optimal_reward(double attained, double optimal) {
  return attained / optimal;
}

// ln(A_ii / A_ij).
double relative_attention(const Eigen::MatrixXd& A, int i, int j);

struct DominanceReport {
  std::vector<bool> inputs;  // per H^j
  bool mixture = false;      // J^A
};

bool is_diag_dominant(const Eigen::MatrixXd& M);

// Row dominance of each H^j and of J^A_ik = sum_j A_ji H^j_ik.
DominanceReport check_diag_dominance(const std::vector<Eigen::MatrixXd>& H,
                                     const Eigen::MatrixXd& A);

// Pearson correlation of first differences.
double cointegration_coeff(const Eigen::VectorXd& t1,
                           const Eigen::VectorXd& t2);

// Two-sided permutation p-value of the co-integration coefficient, obtained
// by shuffling the first-difference sequence of t2.
double permutation_pvalue(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2,
                          int resamples, std::mt19937_64& rng);

double harmonic_mean_p(const std::vector<double>& pvalues);

// One-sample Kolmogorov-Smirnov test against U(0,1); returns the p-value
// from the asymptotic distribution.
double ks_uniform_pvalue(std::vector<double> samples);

}  // namespace d3c

#endif  // D3C_POA_HPP_
