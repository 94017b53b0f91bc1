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

#ifndef D3C_MIXING_HPP_
#define D3C_MIXING_HPP_

// Mixing rows on the simplex. A mixing matrix is a dense row-stochastic
// Eigen matrix; row i belongs to agent i and mixed losses are A^T f.

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace d3c {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Floor applied before taking logs of row entries.
inline constexpr double kRowFloor = 1e-12;

struct LogitBounds {
  double l = -5.0;
  double h = 5.0;
};

template <typename Derived>
Vec<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Vec<Scalar> e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

// A_ii = a0, A_ij = (1 - a0) / (n - 1).
template <typename Scalar = double>
Mat<Scalar> init_mixing(int n, Scalar a0) {
  if (n < 2) throw std::invalid_argument("init_mixing: n must be >= 2");
  if (!(a0 > Scalar(1) / n && a0 < Scalar(1)))
    throw std::invalid_argument("init_mixing: a0 must lie in (1/n, 1)");
  Mat<Scalar> A = Mat<Scalar>::Constant(n, n, (Scalar(1) - a0) / (n - 1));
  A.diagonal().setConstant(a0);
  return A;
}

// f^A = A^T f. Works for rewards as well.
template <typename DA, typename DF>
Vec<typename DA::Scalar> mix_losses(const Eigen::MatrixBase<DA>& A,
                                    const Eigen::MatrixBase<DF>& f) {
  if (A.rows() != A.cols() || A.rows() != f.size())
    throw std::invalid_argument("mix_losses: dimension mismatch");
  return A.transpose() * f;
}

template <typename DA, typename DR>
Vec<typename DA::Scalar> mix_rewards(const Eigen::MatrixBase<DA>& A,
                                     const Eigen::MatrixBase<DR>& r) {
  return mix_losses(A, r);
}

// KL(e_owner || row) = -log row[owner].
template <typename Derived>
typename Derived::Scalar kl_anchor(const Eigen::MatrixBase<Derived>& row,
                                   int owner) {
  return -std::log(row(owner));
}

template <typename Derived>
Vec<typename Derived::Scalar> kl_anchor_grad(
    const Eigen::MatrixBase<Derived>& row, int owner) {
  using Scalar = typename Derived::Scalar;
  Vec<Scalar> g = Vec<Scalar>::Zero(row.size());
  g(owner) = Scalar(-1) / row(owner);
  return g;
}

// softmax(clip(log(row) - eta * grad, l, h))
template <typename DR, typename DG>
Vec<typename DR::Scalar> mirror_step(const Eigen::MatrixBase<DR>& row,
                                     const Eigen::MatrixBase<DG>& grad,
                                     typename DR::Scalar eta,
                                     const LogitBounds& bounds) {
  using Scalar = typename DR::Scalar;
  if (row.size() != grad.size())
    throw std::invalid_argument("mirror_step: dimension mismatch");
  Vec<Scalar> logits = row.array().max(Scalar(kRowFloor)).log().matrix() -
                       eta * grad;
  logits = logits.array().min(Scalar(bounds.h)).max(Scalar(bounds.l));
  return softmax(logits);
}

// Uniform direction on the unit sphere in R^n.
template <typename Rng>
Eigen::VectorXd sample_sphere(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int k = 0; k < n; ++k) a(k) = normal(rng);
    norm = a.norm();
  }
  return a / norm;
}

// softmax(log(row) + delta * a) for a fixed direction a.
template <typename DR, typename DA>
Vec<typename DR::Scalar> perturb_row(const Eigen::MatrixBase<DR>& row,
                                     const Eigen::MatrixBase<DA>& direction,
                                     typename DR::Scalar delta) {
  using Scalar = typename DR::Scalar;
  Vec<Scalar> logits =
      row.array().max(Scalar(kRowFloor)).log().matrix() + delta * direction;
  return softmax(logits);
}

// Returns (perturbed row, direction).
template <typename Rng>
std::pair<Eigen::VectorXd, Eigen::VectorXd> perturb_trial(
    const Eigen::VectorXd& row, double delta, Rng& rng) {
  if (!(delta >= 0.0))
    throw std::invalid_argument("perturb_trial: delta must be nonnegative");
  Eigen::VectorXd a = sample_sphere(static_cast<int>(row.size()), rng);
  return {perturb_row(row, a, delta), a};
}

// Rows interior and summing to one.
template <typename Derived>
bool is_row_stochastic(const Eigen::MatrixBase<Derived>& A,
                       double tol = 1e-9) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (std::abs(A.row(i).sum() - 1.0) > tol) return false;
    if (A.row(i).minCoeff() <= 0.0) return false;
  }
  return true;
}

// |sum(A^T f) - sum(f)| / (1 + |sum f|)
template <typename DA, typename DF>
double budget_error(const Eigen::MatrixBase<DA>& A,
                    const Eigen::MatrixBase<DF>& f) {
  const double total = f.sum();
  return std::abs(mix_losses(A, f).sum() - total) / (1.0 + std::abs(total));
}

}  // namespace d3c

#endif  // D3C_MIXING_HPP_
