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

#include "d3c/poa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace d3c {
namespace {

// Second term of both bounds; vanishes as mu_bar goes to infinity.
double smooth_term(double sqnorm, double mu_bar, double loss) {
  if (std::isinf(mu_bar)) return 0.0;
  return sqnorm / (mu_bar * loss);
}

void check_sizes(const LocalSnapshot& s) {
  if (s.loss_rates.size() != s.mixed_losses.size() ||
      s.own_grad_sqnorms.size() != s.mixed_losses.size())
    throw std::invalid_argument("snapshot vectors differ in length");
}

}  // namespace

UtilitarianBound local_poa_utilitarian(const LocalSnapshot& s,
                                       const PoaConfig& cfg) {
  check_sizes(s);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("poa: dt must be > 0");
  const Eigen::Index n = s.mixed_losses.size();
  UtilitarianBound out;
  out.per_agent.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = s.mixed_losses(i);
    if (!(f > 0.0))
      throw std::domain_error(
          "local_poa_utilitarian: losses must be positive; use rho_additive");
    const double term = s.loss_rates(i) / f +
                        smooth_term(s.own_grad_sqnorms(i), cfg.mu_bar, f);
    out.per_agent(i) = 1.0 + cfg.dt * relu(term);
  }
  out.max = n > 0 ? out.per_agent.maxCoeff() : 1.0;
  return out;
}

double local_poa_egalitarian(const LocalSnapshot& s, double max_loss_rate,
                             const PoaConfig& cfg) {
  check_sizes(s);
  const double fmax = s.mixed_losses.maxCoeff();
  if (!(fmax > 0.0))
    throw std::domain_error("local_poa_egalitarian: max loss must be > 0");
  const double term = max_loss_rate / fmax +
                      smooth_term(s.own_grad_sqnorms.sum(), cfg.mu_bar, fmax);
  return 1.0 + cfg.dt * relu(term);
}

std::optional<double> global_poa_closed(const Game& game) {
  const auto nash = game.nash_total();
  const auto opt = game.opt_total();
  if (!nash || !opt) return std::nullopt;
  return *nash / *opt;
}

double relative_attention(const Eigen::MatrixXd& A, int i, int j) {
  if (i == j) throw std::invalid_argument("relative_attention: i == j");
  return std::log(A(i, i) / A(i, j));
}

bool is_diag_dominant(const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double off = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
    if (std::abs(M(i, i)) < off) return false;
  }
  return true;
}

DominanceReport check_diag_dominance(const std::vector<Eigen::MatrixXd>& H,
                                     const Eigen::MatrixXd& A) {
  DominanceReport rep;
  for (const auto& h : H) rep.inputs.push_back(is_diag_dominant(h));
  rep.mixture = is_diag_dominant(mixed_game_jacobian(H, A));
  return rep;
}

double cointegration_coeff(const Eigen::VectorXd& t1,
                           const Eigen::VectorXd& t2) {
  if (t1.size() != t2.size() || t1.size() < 3)
    throw std::invalid_argument("cointegration: need equal lengths >= 3");
  const Eigen::Index m = t1.size() - 1;
  Eigen::VectorXd d1 = t1.tail(m) - t1.head(m);
  Eigen::VectorXd d2 = t2.tail(m) - t2.head(m);
  d1.array() -= d1.mean();
  d2.array() -= d2.mean();
  const double denom = d1.norm() * d2.norm();
  if (denom == 0.0) return 0.0;
  return d1.dot(d2) / denom;
}

double permutation_pvalue(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2,
                          int resamples, std::mt19937_64& rng) {
  if (resamples < 1) throw std::invalid_argument("permutation: resamples < 1");
  const double observed = std::abs(cointegration_coeff(t1, t2));
  const Eigen::Index m = t2.size() - 1;
  Eigen::VectorXd d2 = t2.tail(m) - t2.head(m);
  std::vector<double> diffs(d2.data(), d2.data() + m);
  int extreme = 0;
  Eigen::VectorXd rebuilt(t2.size());
  for (int r = 0; r < resamples; ++r) {
    std::shuffle(diffs.begin(), diffs.end(), rng);
    rebuilt(0) = t2(0);
    for (Eigen::Index k = 0; k < m; ++k) rebuilt(k + 1) = rebuilt(k) + diffs[k];
    if (std::abs(cointegration_coeff(t1, rebuilt)) >= observed) ++extreme;
  }
  return (extreme + 1.0) / (resamples + 1.0);
}

double harmonic_mean_p(const std::vector<double>& pvalues) {
  if (pvalues.empty()) throw std::invalid_argument("harmonic_mean_p: empty");
  double inv = 0.0;
  for (double p : pvalues) {
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("harmonic_mean_p: p outside (0, 1]");
    inv += 1.0 / p;
  }
  return pvalues.size() / inv;
}

double ks_uniform_pvalue(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ks: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = samples.size();
  double d = 0.0;
  for (size_t k = 0; k < samples.size(); ++k) {
    const double u = std::clamp(samples[k], 0.0, 1.0);
    d = std::max({d, (k + 1) / n - u, u - k / n});
  }
  // Kolmogorov distribution with the Stephens small-sample correction.
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    p += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace d3c
