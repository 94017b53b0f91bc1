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

#ifndef D3C_RL_HPP_
#define D3C_RL_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "d3c/bandit.hpp"

namespace d3c {

// ---------------------------------------------------------------------------
// Linear softmax policy and REINFORCE with a TD(0) linear value baseline.

// Logits W [obs, 1]; the last column is a per-action bias.
struct LinearSoftmaxPolicy {
  Eigen::MatrixXd W;  // actions x (features + 1)

  LinearSoftmaxPolicy() = default;
  LinearSoftmaxPolicy(int actions, int features)
      : W(Eigen::MatrixXd::Zero(actions, features + 1)) {}
  Eigen::VectorXd logits(const Eigen::VectorXd& obs) const {
    const Eigen::Index k = W.cols() - 1;
    return W.leftCols(k) * obs + W.col(k);
  }
  Eigen::VectorXd probs(const Eigen::VectorXd& obs) const {
    return softmax(logits(obs));
  }
  int sample(const Eigen::VectorXd& obs, std::mt19937_64& rng) const;
};

// v . [obs, 1]
struct LinearValue {
  Eigen::VectorXd w;

  LinearValue() = default;
  explicit LinearValue(int features) : w(Eigen::VectorXd::Zero(features + 1)) {}
  double operator()(const Eigen::VectorXd& obs) const {
    return w.head(w.size() - 1).dot(obs) + w(w.size() - 1);
  }
};

struct ReinforceConfig {
  double policy_lr = 0.1;
  int batch = 10;
  double gamma = 1.0;
  double value_lr = 0.1;
};

struct Episode {
  std::vector<Eigen::VectorXd> obs;
  std::vector<int> actions;
  std::vector<double> rewards;

  double total() const;
};

// Score-function ascent on (G_t - V(s_t)) averaged over the batch, then one
// TD(0) sweep of the value function over every transition.
void reinforce_update(LinearSoftmaxPolicy& policy, LinearValue& value,
                      const std::vector<Episode>& episodes,
                      const ReinforceConfig& cfg);

// ---------------------------------------------------------------------------
// Trust-Your-Brother: predator and two prey on a ring of 6 cells.

inline constexpr int kRingCells = 6;
inline constexpr int kRingSteps = 5;
inline constexpr double kMoveCost = -0.01;
inline constexpr double kCaughtPenalty = -1.0;

enum RingAction : int { kStay = 0, kClockwise = 1, kCounterClockwise = 2 };

struct RingWorld {
  int predator = 0;
  std::array<int, 2> prey = {2, 3};
  int step_idx = 0;

  bool terminal() const { return step_idx >= kRingSteps; }
};

int ring_distance(int a, int b);  // shortest distance on the ring
// Counter-clockwise minus clockwise distance from prey to predator.
int ring_feature(int prey, int predator);
Eigen::VectorXd ring_observation(const RingWorld& w);
// Observation scaled into [-1, 1], as fed to the prey policies.
Eigen::VectorXd ring_policy_input(const RingWorld& w);

// Prey `close_side` starts with one empty cell between it and the predator;
// the prey are adjacent. Predator cell and orientation are drawn from rng.
RingWorld ring_reset(int close_side, std::mt19937_64& rng);

// Prey move simultaneously, each pays the move cost for any attempted move
// and -1 if the predator is adjacent once the prey have moved; then the
// predator steps toward the nearest prey unless already adjacent to one.
std::array<double, 2> ring_step(RingWorld& w, std::array<int, 2> actions,
                                std::mt19937_64& rng);

struct RingOracle {
  double optimal_total;       // best expected total over joint policies
  double fair_individual;     // worse-off prey under that policy
  double selfish_total;       // subgame-perfect play, each prey selfish
  std::array<double, 2> selfish_individual;
};

// Exhaustive dynamic programming from the canonical start (predator at 0,
// prey 0 at cell 2, prey 1 at cell 3) over `horizon` steps.
RingOracle ring_optimal_return(int horizon = kRingSteps);

class TrustLearner : public Learner {
 public:
  TrustLearner(std::uint64_t seed, ReinforceConfig cfg = {});
  int num_agents() const override { return 2; }
  Eigen::VectorXd step(const Eigen::MatrixXd& perturbed) override;
  Eigen::VectorXd raw_returns() const override { return raw_; }
  double max_budget_error() const override { return budget_; }
  // Mean raw total (both prey) of the last batch.
  double last_total() const { return raw_.sum(); }
  const LinearSoftmaxPolicy& policy(int i) const { return policies_[i]; }

 private:
  std::mt19937_64 rng_;
  ReinforceConfig cfg_;
  std::array<LinearSoftmaxPolicy, 2> policies_;
  std::array<LinearValue, 2> values_;
  Eigen::VectorXd raw_ = Eigen::VectorXd::Zero(2);
  double budget_ = 0.0;
};

// ---------------------------------------------------------------------------
// Coins: two agents on a 5x5 grid; coin types match agent indices.

inline constexpr int kCoinsSize = 5;
inline constexpr int kCoinsHorizon = 500;
inline constexpr double kCoinSpawnP = 0.005;

enum CoinsAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kNoop = 4 };

struct CoinsWorld {
  std::array<int, 2> agent = {0, 0};  // cell index r*5+c
  std::array<int, kCoinsSize * kCoinsSize> coin{};  // -1 empty, else type
  int t = 0;
  double spawn_p = kCoinSpawnP;

  bool terminal() const { return t >= kCoinsHorizon; }
};

CoinsWorld coins_reset(std::mt19937_64& rng);

struct CoinsEvents {
  int own_pickups = 0;
  int other_pickups = 0;
  int spawns = 0;
};

// Moves (clipped at walls), pickups, then one Bernoulli(spawn_p) spawn
// attempt per coin type on a uniformly drawn empty cell.
std::array<double, 2> coins_step(CoinsWorld& w, std::array<int, 2> actions,
                                 std::mt19937_64& rng,
                                 CoinsEvents* events = nullptr);

// One-hot planes: self, other, own coins, other coins (4 * 25 features).
Eigen::VectorXd coins_observation(const CoinsWorld& w, int agent);

class CoinsLearner : public Learner {
 public:
  CoinsLearner(std::uint64_t seed, ReinforceConfig cfg);
  int num_agents() const override { return 2; }
  Eigen::VectorXd step(const Eigen::MatrixXd& perturbed) override;
  Eigen::VectorXd raw_returns() const override { return raw_; }
  double max_budget_error() const override { return budget_; }

 private:
  std::mt19937_64 rng_;
  ReinforceConfig cfg_;
  std::array<LinearSoftmaxPolicy, 2> policies_;
  std::array<LinearValue, 2> values_;
  Eigen::VectorXd raw_ = Eigen::VectorXd::Zero(2);
  double budget_ = 0.0;
};

ReinforceConfig coins_reinforce_defaults();

}  // namespace d3c

#endif  // D3C_RL_HPP_
