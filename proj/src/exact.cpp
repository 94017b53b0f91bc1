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

#include "d3c/exact.hpp"

#include <stdexcept>

namespace d3c {
namespace {

bool is_frozen(const std::vector<bool>& frozen, int i) {
  return !frozen.empty() && frozen[i];
}

MixedParts compute_parts(const Game& game, const Eigen::VectorXd& x,
                         const Eigen::MatrixXd& A,
                         const std::vector<bool>& frozen) {
  const int n = game.num_players();
  if (A.rows() != n || A.cols() != n)
    throw std::invalid_argument("mixing matrix does not match player count");
  MixedParts p;
  p.f = game.losses(x);
  p.J = game.jacobian(x);
  p.JA = A.transpose() * p.J;
  p.xdot = Eigen::VectorXd::Zero(game.dim());
  for (int k = 0; k < n; ++k) {
    if (is_frozen(frozen, k)) continue;
    const Block& b = game.block(k);
    p.xdot.segment(b.offset, b.size) =
        -p.JA.row(k).segment(b.offset, b.size).transpose();
  }
  return p;
}

Eigen::VectorXd surrogate_grad(const Game& game, const MixedParts& p, int i,
                               double epsilon,
                               const std::vector<bool>& frozen) {
  const int n = game.num_players();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  const double rate = p.JA.row(i).dot(p.xdot);
  if (rate + epsilon <= 0.0) return g;
  // A_ii scales f_i inside f_i^A; A_im scales f_i inside f_m^A and so
  // steers player m's flow.
  g(i) = p.J.row(i).dot(p.xdot);
  for (int m = 0; m < n; ++m) {
    if (is_frozen(frozen, m)) continue;
    const Block& b = game.block(m);
    g(m) -= p.JA.row(i).segment(b.offset, b.size).dot(
        p.J.row(i).segment(b.offset, b.size));
  }
  return g;
}

}  // namespace

MixedParts mixed_parts(const Game& game, const Eigen::VectorXd& x,
                       const Eigen::MatrixXd& A) {
  return compute_parts(game, x, A, {});
}

Eigen::VectorXd mixed_grads(const Game& game, const Eigen::VectorXd& x,
                            const Eigen::MatrixXd& A) {
  return -mixed_parts(game, x, A).xdot;
}

Eigen::VectorXd strategy_step(const Game& game, const JointState& state,
                              double dt) {
  Eigen::VectorXd x = state.x + dt * mixed_parts(game, state.x, state.A).xdot;
  game.project(x);
  return x;
}

double ddt_mixed_loss(const Game& game, const Eigen::VectorXd& x,
                      const Eigen::MatrixXd& A, int i) {
  const MixedParts p = mixed_parts(game, x, A);
  return p.JA.row(i).dot(p.xdot);
}

Eigen::VectorXd grad_a_surrogate(const Game& game, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& A, int i,
                                 double epsilon) {
  return surrogate_grad(game, mixed_parts(game, x, A), i, epsilon, {});
}

Eigen::VectorXd grad_a_surrogate(const Game& game, const MixedParts& parts,
                                 const Eigen::MatrixXd& /*A*/, int i,
                                 double epsilon) {
  return surrogate_grad(game, parts, i, epsilon, {});
}

JointState d3c_exact_step(const Game& game, const JointState& state,
                          const ExactConfig& cfg,
                          const std::vector<bool>& frozen) {
  const int n = game.num_players();
  const MixedParts p = compute_parts(game, state.x, state.A, frozen);
  JointState next;
  next.x = state.x + cfg.dt * p.xdot;
  game.project(next.x);
  next.A = state.A;
  next.step = state.step + 1;
  if (cfg.eta_a == 0.0) return next;
  for (int i = 0; i < n; ++i) {
    if (is_frozen(frozen, i)) continue;
    Eigen::VectorXd g = surrogate_grad(game, p, i, cfg.epsilon, frozen);
    if (cfg.nu != 0.0) g += cfg.nu * kl_anchor_grad(state.A.row(i), i);
    // A zero gradient keeps the row as is, clip included.
    if (g.isZero(0.0)) continue;
    next.A.row(i) =
        mirror_step(state.A.row(i).transpose(), g, cfg.eta_a, cfg.bounds)
            .transpose();
  }
  return next;
}

LocalSnapshot local_snapshot(const Game& game, const MixedParts& p,
                             const Eigen::MatrixXd& A) {
  const int n = game.num_players();
  LocalSnapshot s;
  s.mixed_losses = mix_losses(A, p.f);
  s.loss_rates.resize(n);
  s.own_grad_sqnorms.resize(n);
  for (int i = 0; i < n; ++i) {
    const Block& b = game.block(i);
    s.loss_rates(i) = p.JA.row(i).dot(p.xdot);
    s.own_grad_sqnorms(i) = p.JA.row(i).segment(b.offset, b.size).squaredNorm();
  }
  return s;
}

StrategySampler standard_normal_sampler() {
  return [](const Game& game, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(game.dim());
    for (int k = 0; k < game.dim(); ++k) x(k) = normal(rng);
    return x;
  };
}

StrategySampler uniform_sampler(double lo, double hi) {
  return [lo, hi](const Game& game, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(lo, hi);
    Eigen::VectorXd x(game.dim());
    for (int k = 0; k < game.dim(); ++k) x(k) = unif(rng);
    return x;
  };
}

namespace {

RecordRow make_row(const Game& game, const JointState& s, double dt) {
  const MixedParts p = compute_parts(game, s.x, s.A, {});
  RecordRow row;
  row.step = s.step;
  row.value = p.f;
  row.A = s.A;
  const LocalSnapshot snap = local_snapshot(game, p, s.A);
  if (snap.mixed_losses.minCoeff() > 0.0) {
    PoaConfig cfg;
    cfg.dt = dt;
    const UtilitarianBound b = local_poa_utilitarian(snap, cfg);
    row.rho = b.per_agent;
    row.rho_max = b.max;
  } else {
    row.rho = Eigen::VectorXd::Constant(game.num_players(), kNaN);
  }
  if (const auto opt = game.opt_total()) row.ratio = p.f.sum() / *opt;
  return row;
}

}  // namespace

ExactRunResult run_exact(const Game& game, const ExactConfig& cfg,
                         const StrategySampler& sampler, std::uint64_t seed,
                         const ExactRunOptions& opts) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("exact: dt must be > 0");
  if (!(cfg.eta_a >= 0.0) || !(cfg.nu >= 0.0))
    throw std::invalid_argument("exact: eta_a and nu must be >= 0");
  const int n = game.num_players();
  std::mt19937_64 rng(seed);
  JointState s;
  s.x = sampler(game, rng);
  game.project(s.x);
  if (opts.init_hook) opts.init_hook(s.x);
  ExactConfig step_cfg = cfg;
  if (opts.fixed_mixing.size()) {
    if (opts.fixed_mixing.rows() != n || !is_row_stochastic(opts.fixed_mixing))
      throw std::invalid_argument("exact: fixed_mixing must be n x n stochastic");
    s.A = opts.fixed_mixing;
    step_cfg.eta_a = 0.0;
  } else if (opts.identity_mixing) {
    s.A = Eigen::MatrixXd::Identity(n, n);
    step_cfg.eta_a = 0.0;
  } else {
    s.A = init_mixing<double>(n, opts.a0);
  }

  ExactRunResult out;
  out.record.seed = seed;
  auto log = [&](const JointState& st) {
    out.record.rows.push_back(make_row(game, st, cfg.dt));
  };
  log(s);
  for (int t = 0; t < cfg.steps; ++t) {
    s = d3c_exact_step(game, s, step_cfg, opts.frozen);
    const double err = budget_error(s.A, game.losses(s.x));
    if (err > out.record.max_budget_error) out.record.max_budget_error = err;
    const bool last = t + 1 == cfg.steps;
    if (last || (opts.log_every > 0 && s.step % opts.log_every == 0)) log(s);
  }
  out.final_state = s;
  return out;
}

}  // namespace d3c
