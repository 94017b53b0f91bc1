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

#include "d3c/rl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace d3c {

// ---------------------------------------------------------------------------
// REINFORCE

int LinearSoftmaxPolicy::sample(const Eigen::VectorXd& obs,
                                std::mt19937_64& rng) const {
  const Eigen::VectorXd p = probs(obs);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    u -= p(a);
    if (u < 0.0) return static_cast<int>(a);
  }
  return static_cast<int>(p.size() - 1);
}

double Episode::total() const {
  double s = 0.0;
  for (double r : rewards) s += r;
  return s;
}

void reinforce_update(LinearSoftmaxPolicy& policy, LinearValue& value,
                      const std::vector<Episode>& episodes,
                      const ReinforceConfig& cfg) {
  if (episodes.empty()) return;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(policy.W.rows(), policy.W.cols());
  for (const Episode& ep : episodes) {
    const size_t T = ep.rewards.size();
    double ret = 0.0;
    for (size_t s = T; s-- > 0;) {
      ret = ep.rewards[s] + cfg.gamma * ret;
      const double adv = ret - value(ep.obs[s]);
      Eigen::VectorXd score = -policy.probs(ep.obs[s]);
      score(ep.actions[s]) += 1.0;
      const Eigen::Index k = grad.cols() - 1;
      grad.leftCols(k) += adv * score * ep.obs[s].transpose();
      grad.col(k) += adv * score;
    }
  }
  policy.W += cfg.policy_lr * grad / static_cast<double>(episodes.size());

  for (const Episode& ep : episodes) {
    const size_t T = ep.rewards.size();
    for (size_t s = 0; s < T; ++s) {
      const double next = s + 1 < T ? value(ep.obs[s + 1]) : 0.0;
      const double td = ep.rewards[s] + cfg.gamma * next - value(ep.obs[s]);
      const Eigen::Index k = value.w.size() - 1;
      value.w.head(k) += cfg.value_lr * td * ep.obs[s];
      value.w(k) += cfg.value_lr * td;
    }
  }
}

// ---------------------------------------------------------------------------
// Ring world

namespace {

int wrap(int c) { return ((c % kRingCells) + kRingCells) % kRingCells; }

int action_offset(int a) {
  switch (a) {
    case kStay: return 0;
    case kClockwise: return 1;
    case kCounterClockwise: return -1;
  }
  throw std::invalid_argument("ring: unknown action");
}

bool adjacent(int a, int b) { return ring_distance(a, b) == 1; }

// Simultaneous prey moves. A move is blocked when it targets the predator,
// the other prey's final cell, or swaps places with the other prey.
std::array<int, 2> resolve_moves(const RingWorld& w,
                                 std::array<int, 2> actions) {
  std::array<int, 2> from = w.prey;
  std::array<int, 2> to;
  for (int i = 0; i < 2; ++i) to[i] = wrap(from[i] + action_offset(actions[i]));
  for (int i = 0; i < 2; ++i)
    if (to[i] == w.predator) to[i] = from[i];
  if (to[0] == from[1] && to[1] == from[0]) return from;
  if (to[0] == to[1] && to[0] != from[0] && to[1] != from[1]) return from;
  // A blocked prey may in turn block the other one.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < 2; ++i) {
      if (to[i] != from[i] && to[i] == to[1 - i]) {
        to[i] = from[i];
        changed = true;
      }
    }
  }
  return to;
}

struct Outcome {
  int predator;
  double prob;
};

// Predator candidates after the prey have moved; equally likely.
std::vector<Outcome> predator_moves(int predator, const std::array<int, 2>& prey) {
  if (adjacent(predator, prey[0]) || adjacent(predator, prey[1]))
    return {{predator, 1.0}};
  const int d0 = ring_distance(predator, prey[0]);
  const int d1 = ring_distance(predator, prey[1]);
  std::vector<int> targets;
  if (d0 <= d1) targets.push_back(prey[0]);
  if (d1 <= d0) targets.push_back(prey[1]);
  std::vector<int> cells;
  for (int t : targets) {
    const int cw = wrap(t - predator);
    if (cw < kRingCells - cw) cells.push_back(wrap(predator + 1));
    else if (cw > kRingCells - cw) cells.push_back(wrap(predator - 1));
    else {
      cells.push_back(wrap(predator + 1));
      cells.push_back(wrap(predator - 1));
    }
  }
  std::vector<Outcome> out;
  for (int c : cells) out.push_back({c, 1.0 / cells.size()});
  return out;
}

struct Transition {
  std::array<int, 2> prey;
  std::array<double, 2> rewards;
  std::vector<Outcome> predator;
};

Transition ring_transition(const RingWorld& w, std::array<int, 2> actions) {
  Transition tr;
  tr.prey = resolve_moves(w, actions);
  for (int i = 0; i < 2; ++i) {
    tr.rewards[i] = (actions[i] != kStay ? kMoveCost : 0.0) +
                    (adjacent(w.predator, tr.prey[i]) ? kCaughtPenalty : 0.0);
  }
  tr.predator = predator_moves(w.predator, tr.prey);
  return tr;
}

}  // namespace

int ring_distance(int a, int b) {
  const int d = wrap(a - b);
  return std::min(d, kRingCells - d);
}

int ring_feature(int prey, int predator) {
  const int cw = wrap(predator - prey);
  const int ccw = wrap(prey - predator);
  return ccw - cw;
}

Eigen::VectorXd ring_observation(const RingWorld& w) {
  return Eigen::Vector2d(ring_feature(w.prey[0], w.predator),
                         ring_feature(w.prey[1], w.predator));
}

Eigen::VectorXd ring_policy_input(const RingWorld& w) {
  // Raw features reach +-4; unscaled, TD(0) at lr 0.1 diverges.
  return ring_observation(w) / (kRingCells - 2.0);
}

RingWorld ring_reset(int close_side, std::mt19937_64& rng) {
  if (close_side != 0 && close_side != 1)
    throw std::invalid_argument("ring_reset: close_side must be 0 or 1");
  RingWorld w;
  w.predator = std::uniform_int_distribution<int>(0, kRingCells - 1)(rng);
  const int dir = std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
  w.prey[close_side] = wrap(w.predator + 2 * dir);
  w.prey[1 - close_side] = wrap(w.predator + 3 * dir);
  w.step_idx = 0;
  return w;
}

std::array<double, 2> ring_step(RingWorld& w, std::array<int, 2> actions,
                                std::mt19937_64& rng) {
  if (w.terminal()) throw std::logic_error("ring_step: episode is over");
  Transition tr = ring_transition(w, actions);
  w.prey = tr.prey;
  size_t pick = 0;
  if (tr.predator.size() > 1)
    pick = std::uniform_int_distribution<size_t>(0, tr.predator.size() - 1)(rng);
  w.predator = tr.predator[pick].predator;
  ++w.step_idx;
  return tr.rewards;
}

namespace {

using RingKey = std::tuple<int, int, int, int>;

struct Values {
  double a = 0.0, b = 0.0;
  double total() const { return a + b; }
};

// Expected per-prey values of a joint action given continuation values.
template <typename Cont>
Values action_value(const RingWorld& w, int a0, int a1, Cont&& cont) {
  const Transition tr = ring_transition(w, {a0, a1});
  Values v{tr.rewards[0], tr.rewards[1]};
  for (const Outcome& o : tr.predator) {
    RingWorld next = w;
    next.prey = tr.prey;
    next.predator = o.predator;
    ++next.step_idx;
    const Values c = cont(next);
    v.a += o.prob * c.a;
    v.b += o.prob * c.b;
  }
  return v;
}

constexpr double kTieTol = 1e-12;

struct CoopSolver {
  int horizon;
  std::map<RingKey, Values> memo;

  Values solve(const RingWorld& w) {
    if (w.step_idx >= horizon) return {};
    const RingKey key{w.step_idx, w.predator, w.prey[0], w.prey[1]};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Values best{-1e300, -1e300};
    for (int a0 = 0; a0 < 3; ++a0) {
      for (int a1 = 0; a1 < 3; ++a1) {
        const Values v =
            action_value(w, a0, a1, [&](const RingWorld& n) { return solve(n); });
        const bool better = v.total() > best.total() + kTieTol;
        const bool tie = std::abs(v.total() - best.total()) <= kTieTol;
        if (better || (tie && std::min(v.a, v.b) > std::min(best.a, best.b)))
          best = v;
      }
    }
    memo[key] = best;
    return best;
  }
};

struct SelfishSolver {
  int horizon;
  std::map<RingKey, Values> memo;

  Values solve(const RingWorld& w) {
    if (w.step_idx >= horizon) return {};
    const RingKey key{w.step_idx, w.predator, w.prey[0], w.prey[1]};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Values pay[3][3];
    for (int a0 = 0; a0 < 3; ++a0)
      for (int a1 = 0; a1 < 3; ++a1)
        pay[a0][a1] = action_value(w, a0, a1,
                                   [&](const RingWorld& n) { return solve(n); });
    // Pure equilibria of the stage game; keep the one with the best total.
    bool found = false;
    Values best;
    for (int a0 = 0; a0 < 3; ++a0) {
      for (int a1 = 0; a1 < 3; ++a1) {
        bool eq = true;
        for (int d = 0; d < 3 && eq; ++d) {
          if (pay[d][a1].a > pay[a0][a1].a + kTieTol) eq = false;
          if (pay[a0][d].b > pay[a0][a1].b + kTieTol) eq = false;
        }
        if (eq && (!found || pay[a0][a1].total() > best.total() + kTieTol)) {
          best = pay[a0][a1];
          found = true;
        }
      }
    }
    if (!found) throw std::runtime_error("ring oracle: no pure stage equilibrium");
    memo[key] = best;
    return best;
  }
};

}  // namespace

RingOracle ring_optimal_return(int horizon) {
  if (horizon < 0) throw std::invalid_argument("ring oracle: horizon < 0");
  RingWorld start;
  start.predator = 0;
  start.prey = {2, 3};
  start.step_idx = 0;
  CoopSolver coop{horizon, {}};
  SelfishSolver selfish{horizon, {}};
  const Values c = coop.solve(start);
  const Values s = selfish.solve(start);
  RingOracle out;
  out.optimal_total = c.total();
  out.fair_individual = std::min(c.a, c.b);
  out.selfish_total = s.total();
  out.selfish_individual = {s.a, s.b};
  return out;
}

TrustLearner::TrustLearner(std::uint64_t seed, ReinforceConfig cfg)
    : rng_(seed), cfg_(cfg) {
  for (int i = 0; i < 2; ++i) {
    policies_[i] = LinearSoftmaxPolicy(3, 2);
    values_[i] = LinearValue(2);
  }
}

Eigen::VectorXd TrustLearner::step(const Eigen::MatrixXd& perturbed) {
  std::array<std::vector<Episode>, 2> batch;
  Eigen::Vector2d raw = Eigen::Vector2d::Zero();
  Eigen::Vector2d mixed = Eigen::Vector2d::Zero();
  for (int e = 0; e < cfg_.batch; ++e) {
    // First half of the batch threatens prey 0, second half prey 1.
    RingWorld w = ring_reset(e < cfg_.batch / 2 ? 0 : 1, rng_);
    Episode ep[2];
    while (!w.terminal()) {
      const Eigen::VectorXd obs = ring_policy_input(w);
      std::array<int, 2> act;
      for (int i = 0; i < 2; ++i) act[i] = policies_[i].sample(obs, rng_);
      const auto r = ring_step(w, act, rng_);
      const Eigen::Vector2d rv(r[0], r[1]);
      const Eigen::VectorXd rm = mix_rewards(perturbed, rv);
      const double err = std::abs(rm.sum() - rv.sum()) / (1.0 + std::abs(rv.sum()));
      budget_ = std::max(budget_, err);
      for (int i = 0; i < 2; ++i) {
        ep[i].obs.push_back(obs);
        ep[i].actions.push_back(act[i]);
        ep[i].rewards.push_back(rm(i));
        raw(i) += rv(i);
        mixed(i) += rm(i);
      }
    }
    for (int i = 0; i < 2; ++i) batch[i].push_back(std::move(ep[i]));
  }
  for (int i = 0; i < 2; ++i)
    reinforce_update(policies_[i], values_[i], batch[i], cfg_);
  raw_ = raw / cfg_.batch;
  return mixed / cfg_.batch;
}

// ---------------------------------------------------------------------------
// Coins

namespace {

constexpr int kCells = kCoinsSize * kCoinsSize;

int move_cell(int cell, int action) {
  int r = cell / kCoinsSize, c = cell % kCoinsSize;
  switch (action) {
    case kUp: r = std::max(0, r - 1); break;
    case kDown: r = std::min(kCoinsSize - 1, r + 1); break;
    case kLeft: c = std::max(0, c - 1); break;
    case kRight: c = std::min(kCoinsSize - 1, c + 1); break;
    case kNoop: break;
    default: throw std::invalid_argument("coins: unknown action");
  }
  return r * kCoinsSize + c;
}

}  // namespace

CoinsWorld coins_reset(std::mt19937_64& rng) {
  CoinsWorld w;
  w.coin.fill(-1);
  std::uniform_int_distribution<int> cell(0, kCells - 1);
  w.agent[0] = cell(rng);
  do {
    w.agent[1] = cell(rng);
  } while (w.agent[1] == w.agent[0]);
  w.t = 0;
  return w;
}

std::array<double, 2> coins_step(CoinsWorld& w, std::array<int, 2> actions,
                                 std::mt19937_64& rng, CoinsEvents* events) {
  if (w.terminal()) throw std::logic_error("coins_step: episode is over");
  std::array<double, 2> r = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) w.agent[i] = move_cell(w.agent[i], actions[i]);
  // Agents landing on the same coin: the collector is drawn at random.
  std::array<int, 2> order = {0, 1};
  if (w.agent[0] == w.agent[1] && w.coin[w.agent[0]] >= 0 &&
      std::uniform_int_distribution<int>(0, 1)(rng))
    order = {1, 0};
  for (int i : order) {
    const int type = w.coin[w.agent[i]];
    if (type < 0) continue;
    w.coin[w.agent[i]] = -1;
    r[i] += 1.0;
    if (type != i) {
      r[type] -= 2.0;
      if (events) ++events->other_pickups;
    } else if (events) {
      ++events->own_pickups;
    }
  }
  for (int type = 0; type < 2; ++type) {
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= w.spawn_p)
      continue;
    std::vector<int> empty;
    for (int c = 0; c < kCells; ++c)
      if (w.coin[c] < 0 && c != w.agent[0] && c != w.agent[1]) empty.push_back(c);
    if (empty.empty()) continue;
    const int pick =
        empty[std::uniform_int_distribution<size_t>(0, empty.size() - 1)(rng)];
    w.coin[pick] = type;
    if (events) ++events->spawns;
  }
  ++w.t;
  return r;
}

Eigen::VectorXd coins_observation(const CoinsWorld& w, int agent) {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(4 * kCells);
  obs(w.agent[agent]) = 1.0;
  obs(kCells + w.agent[1 - agent]) = 1.0;
  for (int c = 0; c < kCells; ++c) {
    if (w.coin[c] == agent) obs(2 * kCells + c) = 1.0;
    else if (w.coin[c] >= 0) obs(3 * kCells + c) = 1.0;
  }
  return obs;
}

ReinforceConfig coins_reinforce_defaults() {
  ReinforceConfig cfg;
  cfg.policy_lr = 0.01;
  cfg.batch = 1;
  cfg.gamma = 0.98;
  cfg.value_lr = 0.01;
  return cfg;
}

CoinsLearner::CoinsLearner(std::uint64_t seed, ReinforceConfig cfg)
    : rng_(seed), cfg_(cfg) {
  for (int i = 0; i < 2; ++i) {
    policies_[i] = LinearSoftmaxPolicy(5, 4 * kCells);
    values_[i] = LinearValue(4 * kCells);
  }
}

Eigen::VectorXd CoinsLearner::step(const Eigen::MatrixXd& perturbed) {
  std::array<std::vector<Episode>, 2> batch;
  Eigen::Vector2d raw = Eigen::Vector2d::Zero();
  Eigen::Vector2d mixed = Eigen::Vector2d::Zero();
  for (int e = 0; e < cfg_.batch; ++e) {
    CoinsWorld w = coins_reset(rng_);
    Episode ep[2];
    while (!w.terminal()) {
      std::array<Eigen::VectorXd, 2> obs = {coins_observation(w, 0),
                                            coins_observation(w, 1)};
      std::array<int, 2> act;
      for (int i = 0; i < 2; ++i) act[i] = policies_[i].sample(obs[i], rng_);
      const auto r = coins_step(w, act, rng_);
      const Eigen::Vector2d rv(r[0], r[1]);
      const Eigen::VectorXd rm = mix_rewards(perturbed, rv);
      budget_ = std::max(budget_, std::abs(rm.sum() - rv.sum()) /
                                      (1.0 + std::abs(rv.sum())));
      for (int i = 0; i < 2; ++i) {
        ep[i].obs.push_back(obs[i]);
        ep[i].actions.push_back(act[i]);
        ep[i].rewards.push_back(rm(i));
        raw(i) += rv(i);
        mixed(i) += rm(i);
      }
    }
    for (int i = 0; i < 2; ++i) batch[i].push_back(std::move(ep[i]));
  }
  for (int i = 0; i < 2; ++i)
    reinforce_update(policies_[i], values_[i], batch[i], cfg_);
  raw_ = raw / cfg_.batch;
  return mixed / cfg_.batch;
}

}  // namespace d3c
