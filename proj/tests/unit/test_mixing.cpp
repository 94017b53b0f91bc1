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


#include <cmath>
#include <random>

#include "d3c/mixing.hpp"
#include "doctest.h"

namespace {

using d3c::LogitBounds;

// Interior row drawn from a flat Dirichlet.
Eigen::VectorXd random_row(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) w(k) = e(rng) + 1e-6;
  return w / w.sum();
}

}  // namespace

TEST_CASE("init_mixing values and preconditions") {
  const Eigen::MatrixXd A2 = d3c::init_mixing(2, 0.99);
  CHECK(A2(0, 0) == doctest::Approx(0.99));
  CHECK(A2(0, 1) == doctest::Approx(0.01));
  CHECK(A2(1, 0) == doctest::Approx(0.01));
  const Eigen::MatrixXd A3 = d3c::init_mixing(3, 0.99);
  CHECK(A3(0, 2) == doctest::Approx(0.005));
  CHECK(A3(2, 1) == doctest::Approx(0.005));
  const Eigen::MatrixXd A4 = d3c::init_mixing(4, 0.4);
  CHECK(A4(1, 3) == doctest::Approx(0.2));
  CHECK_THROWS_AS(d3c::init_mixing(4, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(d3c::init_mixing(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(d3c::init_mixing(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(d3c::init_mixing(1, 0.99), std::invalid_argument);
}

TEST_CASE("mix_losses uses the transpose") {
  Eigen::Matrix3d A;
  A << 0.9, 0.05, 0.05,
       0.3, 0.4, 0.3,
       0.5, 0.25, 0.25;
  const Eigen::Vector3d f(1.0, 10.0, 100.0);
  const Eigen::VectorXd m = d3c::mix_losses(A, f);
  CHECK(m(0) == doctest::Approx(0.9 * 1 + 0.3 * 10 + 0.5 * 100));
  CHECK(m.sum() == doctest::Approx(f.sum()));

  const Eigen::Matrix2d U = Eigen::Matrix2d::Constant(0.5);
  const Eigen::VectorXd u = d3c::mix_losses(U, Eigen::Vector2d(2.0, 4.0));
  CHECK(u(0) == doctest::Approx(3.0));
  CHECK(u(1) == doctest::Approx(3.0));

  const Eigen::VectorXd same =
      d3c::mix_losses(Eigen::Matrix3d::Identity(), f);
  CHECK((same - f).norm() == 0.0);

  const Eigen::MatrixXd Ud = U;
  CHECK_THROWS_AS(d3c::mix_losses(Ud, f), std::invalid_argument);
}

TEST_CASE("mix_rewards") {
  const Eigen::Matrix2d U = Eigen::Matrix2d::Constant(0.5);
  const Eigen::VectorXd z = d3c::mix_rewards(U, Eigen::Vector2d(1.0, -1.0));
  CHECK(z.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const Eigen::VectorXd r =
      d3c::mix_rewards(d3c::init_mixing(2, 0.99), Eigen::Vector2d(1.0, 0.0));
  CHECK(r(0) == doctest::Approx(0.99));
  CHECK(r(1) == doctest::Approx(0.01));
}

TEST_CASE("budget balance on random matrices") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 9;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) A.row(i) = random_row(n, rng).transpose();
    Eigen::VectorXd f(n);
    for (int k = 0; k < n; ++k) f(k) = normal(rng);
    REQUIRE(d3c::budget_error(A, f) <= 1e-9);
  }
}

TEST_CASE("kl_anchor and its gradient") {
  Eigen::Vector2d row(0.99, 0.01);
  CHECK(d3c::kl_anchor(row, 0) == doctest::Approx(0.01005033585350145));
  row << 0.5, 0.5;
  CHECK(d3c::kl_anchor(row, 0) == doctest::Approx(std::log(2.0)));
  const Eigen::VectorXd g = d3c::kl_anchor_grad(row, 0);
  CHECK(g(0) == doctest::Approx(-2.0));
  CHECK(g(1) == 0.0);
  row << 1.0 - 1e-12, 1e-12;
  CHECK(d3c::kl_anchor(row, 0) == doctest::Approx(0.0));
  CHECK(d3c::kl_anchor_grad(row, 0)(0) == doctest::Approx(-1.0));
}

TEST_CASE("kl_anchor_grad matches central differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const int owner = trial % n;
    const Eigen::VectorXd row = random_row(n, rng);
    const Eigen::VectorXd g = d3c::kl_anchor_grad(row, owner);
    for (int k = 0; k < n; ++k) {
      const double h = 1e-6 * row(k);
      Eigen::VectorXd p = row, m = row;
      p(k) += h;
      m(k) -= h;
      const double fd =
          (d3c::kl_anchor(p, owner) - d3c::kl_anchor(m, owner)) / (2 * h);
      REQUIRE(std::abs(fd - g(k)) <= 1e-6 * std::max(1.0, std::abs(g(k))));
    }
  }
}

TEST_CASE("mirror_step examples") {
  const LogitBounds wide{-50.0, 50.0};
  const Eigen::Vector2d half(0.5, 0.5);
  const Eigen::VectorXd s =
      d3c::mirror_step(half, Eigen::Vector2d(1.0, 0.0), 1.0, wide);
  const double e = std::exp(-1.0);
  CHECK(s(0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(s(0) == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(s(1) == doctest::Approx(0.7311).epsilon(1e-4));

  const Eigen::Vector3d row(0.2, 0.3, 0.5);
  const Eigen::VectorXd same =
      d3c::mirror_step(row, Eigen::Vector3d::Zero(), 1.0, LogitBounds{});
  CHECK((same - row).cwiseAbs().maxCoeff() < 1e-15);

  // Extreme gradient saturates both clip bounds.
  const Eigen::VectorXd sat =
      d3c::mirror_step(half, Eigen::Vector2d(1e6, -1e6), 1.0, LogitBounds{});
  CHECK(sat(1) / sat(0) == doctest::Approx(std::exp(10.0)));
}

TEST_CASE("mirror_step fuzz: simplex closure and shift invariance") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  int shift_checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + trial % 7;
    const Eigen::VectorXd row = random_row(n, rng);
    Eigen::VectorXd g(n);
    const double scale = std::pow(10.0, unif(rng) - 1.0);
    for (int k = 0; k < n; ++k) g(k) = scale * normal(rng);
    const double eta = unif(rng);
    const Eigen::VectorXd out = d3c::mirror_step(row, g, eta, LogitBounds{});
    REQUIRE(std::abs(out.sum() - 1.0) <= 1e-9);
    REQUIRE(out.minCoeff() >= 1e-12);
    REQUIRE(out.allFinite());

    const double shift = normal(rng);
    const Eigen::VectorXd logits = row.array().log().matrix() - eta * g;
    const Eigen::VectorXd shifted_logits =
        logits.array() - eta * shift;
    const bool unclipped = logits.cwiseAbs().maxCoeff() < 5.0 &&
                           shifted_logits.cwiseAbs().maxCoeff() < 5.0;
    if (unclipped) {
      const Eigen::VectorXd g2 = (g.array() + shift).matrix();
      const Eigen::VectorXd out2 = d3c::mirror_step(row, g2, eta, LogitBounds{});
      REQUIRE((out2 - out).cwiseAbs().maxCoeff() <= 1e-12);
      ++shift_checked;
    }
  }
  CHECK(shift_checked > 1000);
}

TEST_CASE("perturbation examples") {
  const Eigen::Vector2d half(0.5, 0.5);
  const Eigen::VectorXd p = d3c::perturb_row(half, Eigen::Vector2d(1.0, 0.0), 0.1);
  CHECK(p(0) == doctest::Approx(0.5250).epsilon(1e-4));
  CHECK(p(1) == doctest::Approx(0.4750).epsilon(1e-4));

  std::mt19937_64 rng(5);
  const Eigen::Vector3d row(0.7, 0.2, 0.1);
  const auto [same, dir] = d3c::perturb_trial(row, 0.0, rng);
  CHECK((same - row).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(dir.norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(d3c::perturb_trial(row, -1.0, rng), std::invalid_argument);
}

TEST_CASE("sphere sampling: unit norm, zero mean, symmetric marginals") {
  std::mt19937_64 rng(13);
  const int n = 4;
  const int draws = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXi positive = Eigen::VectorXi::Zero(n);
  for (int t = 0; t < draws; ++t) {
    const Eigen::VectorXd a = d3c::sample_sphere(n, rng);
    REQUIRE(std::abs(a.squaredNorm() - 1.0) <= 1e-9);
    sum += a;
    for (int k = 0; k < n; ++k) positive(k) += a(k) > 0.0;
  }
  // Each coordinate has variance 1/n on the sphere.
  const double sigma_mean = std::sqrt(1.0 / n / draws);
  for (int k = 0; k < n; ++k) {
    CHECK(std::abs(sum(k) / draws) < 3.0 * sigma_mean);
    // Sign test, two-sided p > 0.01.
    const double z = (positive(k) - 0.5 * draws) / std::sqrt(0.25 * draws);
    CHECK(std::abs(z) < 2.5758);
  }
}

TEST_CASE("is_row_stochastic") {
  CHECK(d3c::is_row_stochastic(d3c::init_mixing(3, 0.9)));
  CHECK_FALSE(d3c::is_row_stochastic(Eigen::Matrix2d::Identity()));
  Eigen::Matrix2d bad;
  bad << 0.6, 0.6, 0.5, 0.5;
  CHECK_FALSE(d3c::is_row_stochastic(bad));
}
