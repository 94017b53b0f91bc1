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

#ifndef D3C_GAMES_HPP_
#define D3C_GAMES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d3c/mixing.hpp"

namespace d3c {

// Contiguous slice of the joint parameter vector owned by one player.
struct Block {
  int offset = 0;
  int size = 0;
};

enum class Domain { kReal, kSimplexLogits };

// A differentiable n-player game over a flat parameter vector x.
class Game {
 public:
  explicit Game(std::vector<Block> blocks, Domain domain = Domain::kReal)
      : blocks_(std::move(blocks)), domain_(domain) {
    dim_ = 0;
    for (const Block& b : blocks_) dim_ += b.size;
  }
  virtual ~Game() = default;

  virtual std::string name() const = 0;
  // Length-n loss vector.
  virtual Eigen::VectorXd losses(const Eigen::VectorXd& x) const = 0;
  // n x dim matrix; row j is the gradient of f_j over the whole of x.
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const = 0;
  // Maps x back into the strategy domain after an update (no-op by default).
  virtual void project(Eigen::VectorXd& /*x*/) const {}

  virtual std::optional<double> nash_total() const { return std::nullopt; }
  virtual std::optional<double> opt_total() const { return std::nullopt; }

  int num_players() const { return static_cast<int>(blocks_.size()); }
  int dim() const { return dim_; }
  const Block& block(int i) const { return blocks_[i]; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Domain domain() const { return domain_; }

 private:
  std::vector<Block> blocks_;
  Domain domain_;
  int dim_;
};

// Equal-size consecutive blocks.
std::vector<Block> uniform_blocks(int n, int size);

// ---------------------------------------------------------------------------
// Game 1: f_1 = x_1^2 + 1/(x_2^2 + kappa), symmetric for f_2, x in [0,1]^2.

template <typename Scalar>
Vec<Scalar> game1_losses(const Vec<Scalar>& x, double kappa) {
  Vec<Scalar> f(2);
  f(0) = x(0) * x(0) + Scalar(1) / (x(1) * x(1) + Scalar(kappa));
  f(1) = x(1) * x(1) + Scalar(1) / (x(0) * x(0) + Scalar(kappa));
  return f;
}

struct Game1ClosedForms {
  Eigen::Vector2d nash_point;
  double nash_loss;  // per player
  Eigen::Vector2d opt_point;
  double opt_loss;   // per player
  double poa;
};

Game1ClosedForms game1_closed_forms(double kappa);

class NashParadoxGame : public Game {
 public:
  explicit NashParadoxGame(double kappa);
  std::string name() const override { return "game1"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
  void project(Eigen::VectorXd& x) const override;
  std::optional<double> nash_total() const override;
  std::optional<double> opt_total() const override;
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

// ---------------------------------------------------------------------------
// Game 2: f = (x_1^2, x_2^2 - 1.1 x_1^2).

template <typename Scalar>
Vec<Scalar> game2_losses(const Vec<Scalar>& x) {
  Vec<Scalar> f(2);
  f(0) = x(0) * x(0);
  f(1) = x(1) * x(1) - Scalar(1.1) * x(0) * x(0);
  return f;
}

class UnfairGame : public Game {
 public:
  UnfairGame();
  std::string name() const override { return "game2"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
};

// ---------------------------------------------------------------------------
// Convex n-player prisoner's dilemma. x is the row-major flattening of the
// n x (n-1) grid x_ij; f_i = sum_k (x_k - C_ik)^2.

Eigen::MatrixXd pd_build_c(int n, double c);

template <typename Scalar>
Vec<Scalar> pd_losses(const Vec<Scalar>& x, const Eigen::MatrixXd& C) {
  Vec<Scalar> f(C.rows());
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    Scalar s(0);
    for (Eigen::Index k = 0; k < C.cols(); ++k) {
      const Scalar d = x(k) - Scalar(C(i, k));
      s += d * d;
    }
    f(i) = s;
  }
  return f;
}

struct MaverickValues {
  double cooperator_loss;
  double all_defect_loss;
};

// Cooperator loss m + (n-m-1)^2/(n-m) when m players defect at the origin.
MaverickValues pd_maverick_values(int n, int m, double c = 1.0);

class PDGame : public Game {
 public:
  PDGame(int n, double c);
  std::string name() const override { return "pd"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
  std::optional<double> nash_total() const override;
  std::optional<double> opt_total() const override;
  const Eigen::MatrixXd& targets() const { return C_; }
  double c() const { return c_; }

 private:
  int n_;
  double c_;
  Eigen::MatrixXd C_;
};

// ---------------------------------------------------------------------------
// Four-driver Braess network. Routes: SAE, SBE and (with the shortcut) SABE.

struct TrafficNetwork {
  int C = 45, D = 45, E = 0, F = 10, G = 10;
  bool shortcut = true;
  std::uint64_t seed = 0;  // generator seed, 0 for hand-built networks

  int routes() const { return shortcut ? 3 : 2; }
  Eigen::MatrixXd congestion() const;  // M
  Eigen::VectorXd constants() const;   // b
  // Shortcut route strictly dominant for every driver.
  bool shortcut_dominant() const;
  std::string to_record() const;
  static TrafficNetwork from_record(const std::string& record);
};

inline constexpr int kDrivers = 4;

// P is 4 x routes, rows on the simplex.
Eigen::VectorXd traffic_expected_commutes(const Eigen::MatrixXd& P,
                                          const TrafficNetwork& net);
// Commute times for a pure profile (route index per driver).
Eigen::VectorXd traffic_pure_commutes(const std::vector<int>& routes,
                                      const TrafficNetwork& net);
// Minimal total commute over all pure profiles.
double traffic_opt_total(const TrafficNetwork& net);

// Rejection sampler for networks with a strictly dominant shortcut whose
// all-shortcut equilibrium exceeds the two-route optimum by more than delta.
template <typename Rng>
TrafficNetwork gen_braess(double delta, Rng& rng);

double braess_two_route_opt(int C, int D, int F, int G);

class TrafficGame : public Game {
 public:
  explicit TrafficGame(TrafficNetwork net);
  std::string name() const override { return "traffic"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
  std::optional<double> nash_total() const override;
  std::optional<double> opt_total() const override { return opt_; }
  // Route probabilities, 4 x routes.
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& x) const;
  const TrafficNetwork& network() const { return net_; }

 private:
  TrafficNetwork net_;
  double opt_;
};

// ---------------------------------------------------------------------------
// 2x2 bilinear game on the simplex; each player holds two logits.
// The cooperative matrix is [[a, b], [c, d]] split evenly between players.

class BilinearGame : public Game {
 public:
  BilinearGame(double a, double b, double c, double d);
  std::string name() const override { return "bilinear"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
  const Eigen::Matrix2d& payoff() const { return C_; }
  // Probability of each player's first action.
  Eigen::Vector2d first_action_probs(const Eigen::VectorXd& x) const;

 private:
  Eigen::Matrix2d C_;
};

// Logits for first-action probabilities (p, q).
Eigen::VectorXd bilinear_logits(double p, double q);

// Share of uniform (p, q) starts whose cooperative gradient flow ends at
// (p, q) = (1, 0).
double bilinear_basin_fraction(double a, double b, double c, double d,
                               int trials, std::mt19937_64& rng,
                               double dt = 0.1, int steps = 5000);

// ---------------------------------------------------------------------------
// Two parties {0,1} and {2,3}. Candidate i holds (p_i, y_i): a policy stance
// p_i in a two-player convex PD with its party mate, and a campaign effort
// y_i with cost y_i^2 and inter-party exchange y_i * sum_k Z_ik y_k. Z is
// antisymmetric and supported on cross-party pairs, so the exchange terms
// sum to zero.

Eigen::Matrix4d election_default_z(double kappa_z = 1.0);

class ElectionGame : public Game {
 public:
  ElectionGame(double w_pd, const Eigen::Matrix4d& Z, double c = 1.0);
  std::string name() const override { return "election"; }
  Eigen::VectorXd losses(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
  // Inter-party part of each loss.
  Eigen::VectorXd inter_party(const Eigen::VectorXd& x) const;
  // Constant Hessian of each f_j (4 of 8x8).
  std::vector<Eigen::MatrixXd> hessians() const;
  static int party(int i) { return i < 2 ? 0 : 1; }
  static int mate(int i) { return i ^ 1; }
  static int stance(int i) { return 2 * i; }
  static int effort(int i) { return 2 * i + 1; }

 private:
  double w_pd_;
  double c_;
  Eigen::Matrix4d Z_;
};

ElectionGame election_build(double w_pd, const Eigen::Matrix4d& Z);

// Jacobian of the mixed simultaneous gradient for scalar-strategy games
// with constant Hessians: J_ik = sum_j A_ji H^j_ik.
Eigen::MatrixXd mixed_game_jacobian(const std::vector<Eigen::MatrixXd>& H,
                                    const Eigen::MatrixXd& A);
// Block form for quadratic games: rows of block i are sum_j A_ji H^j.
Eigen::MatrixXd mixed_game_jacobian(const std::vector<Eigen::MatrixXd>& H,
                                    const Eigen::MatrixXd& A,
                                    const std::vector<Block>& blocks);

// ---------------------------------------------------------------------------
// Central-difference Jacobian of game losses, used by the gradient gates.
Eigen::MatrixXd fd_jacobian(const Game& game, const Eigen::VectorXd& x,
                            double h = 1e-6);

// ---------------------------------------------------------------------------

template <typename Rng>
TrafficNetwork gen_braess(double delta, Rng& rng) {
  if (!(delta >= 0.0)) throw std::invalid_argument("gen_braess: delta < 0");
  auto uniform = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  for (;;) {
    TrafficNetwork net;
    net.F = uniform(1, 20);
    net.G = uniform(1, 20);
    net.C = uniform(4 * net.G + 10, 4 * net.G + 20);
    net.D = uniform(4 * net.F + 10, 4 * net.F + 20);
    const double tau_opt = braess_two_route_opt(net.C, net.D, net.F, net.G);
    // Both properties are strict, so the interval endpoints are excluded.
    const double lower = (tau_opt + delta) / 4.0 - 4.0 * (net.F + net.G);
    const int e_lo = std::max(0, static_cast<int>(std::floor(lower)) + 1);
    const int e_hi = std::min(net.C - 4 * net.G, net.D - 4 * net.F) - 1;
    if (e_lo > e_hi) continue;
    net.E = uniform(e_lo, e_hi);
    net.shortcut = true;
    return net;
  }
}

}  // namespace d3c

#endif  // D3C_GAMES_HPP_
