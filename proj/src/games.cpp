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

#include "d3c/games.hpp"

#include <sstream>

namespace d3c {

std::vector<Block> uniform_blocks(int n, int size) {
  std::vector<Block> out(n);
  for (int i = 0; i < n; ++i) out[i] = {i * size, size};
  return out;
}

// ---------------------------------------------------------------------------
// Game 1

Game1ClosedForms game1_closed_forms(double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0))
    throw std::invalid_argument("game1: kappa must lie in [0, 1)");
  Game1ClosedForms out;
  out.nash_point = Eigen::Vector2d::Zero();
  out.nash_loss = kappa > 0.0 ? 1.0 / kappa
                              : std::numeric_limits<double>::infinity();
  const double s = std::sqrt(1.0 - kappa);
  out.opt_point = Eigen::Vector2d(s, s);
  out.opt_loss = 2.0 - kappa;
  out.poa = out.nash_loss / out.opt_loss;
  return out;
}

NashParadoxGame::NashParadoxGame(double kappa)
    : Game(uniform_blocks(2, 1)), kappa_(kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0))
    throw std::invalid_argument("game1: kappa must lie in [0, 1)");
}

Eigen::VectorXd NashParadoxGame::losses(const Eigen::VectorXd& x) const {
  return game1_losses<double>(x, kappa_);
}

Eigen::MatrixXd NashParadoxGame::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J(2, 2);
  const double d1 = x(1) * x(1) + kappa_;
  const double d0 = x(0) * x(0) + kappa_;
  J(0, 0) = 2.0 * x(0);
  J(0, 1) = -2.0 * x(1) / (d1 * d1);
  J(1, 0) = -2.0 * x(0) / (d0 * d0);
  J(1, 1) = 2.0 * x(1);
  return J;
}

void NashParadoxGame::project(Eigen::VectorXd& x) const {
  x = x.cwiseMax(0.0).cwiseMin(1.0);
}

std::optional<double> NashParadoxGame::nash_total() const {
  return 2.0 * game1_closed_forms(kappa_).nash_loss;
}

std::optional<double> NashParadoxGame::opt_total() const {
  return 2.0 * game1_closed_forms(kappa_).opt_loss;
}

// ---------------------------------------------------------------------------
// Game 2

UnfairGame::UnfairGame() : Game(uniform_blocks(2, 1)) {}

Eigen::VectorXd UnfairGame::losses(const Eigen::VectorXd& x) const {
  return game2_losses<double>(x);
}

Eigen::MatrixXd UnfairGame::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J(2, 2);
  J << 2.0 * x(0), 0.0, -2.2 * x(0), 2.0 * x(1);
  return J;
}

// ---------------------------------------------------------------------------
// Prisoner's dilemma

Eigen::MatrixXd pd_build_c(int n, double c) {
  if (n < 2) throw std::invalid_argument("pd: n must be >= 2");
  if (!(c > 0.0)) throw std::invalid_argument("pd: c must be positive");
  const int L = n * (n - 1);
  // row = (([0]*(n-1) + [c]) * (n-1))[::-1]
  std::vector<double> base;
  base.reserve(L);
  for (int r = 0; r < n - 1; ++r) {
    for (int k = 0; k < n - 1; ++k) base.push_back(0.0);
    base.push_back(c);
  }
  std::vector<double> row(base.rbegin(), base.rend());
  // circulant(row)[i][j] = row[(i - j) mod L]; keep n rows, reverse columns.
  Eigen::MatrixXd C(n, L);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < L; ++k) {
      const int j = L - 1 - k;
      C(i, k) = row[((i - j) % L + L) % L];
    }
  }
  return C;
}

MaverickValues pd_maverick_values(int n, int m, double c) {
  if (m < 0 || m >= n - 1)
    throw std::invalid_argument("pd_maverick_values: need 0 <= m < n-1");
  const double k = n - m;
  MaverickValues v;
  v.cooperator_loss = c * c * (m + (k - 1.0) * (k - 1.0) / k);
  v.all_defect_loss = c * c * (n - 1.0);
  return v;
}

PDGame::PDGame(int n, double c)
    : Game(uniform_blocks(n, n - 1)), n_(n), c_(c), C_(pd_build_c(n, c)) {}

Eigen::VectorXd PDGame::losses(const Eigen::VectorXd& x) const {
  return pd_losses<double>(x, C_);
}

Eigen::MatrixXd PDGame::jacobian(const Eigen::VectorXd& x) const {
  return 2.0 * (x.transpose().replicate(n_, 1) - C_);
}

std::optional<double> PDGame::nash_total() const {
  return n_ * (n_ - 1.0) * c_ * c_;
}

std::optional<double> PDGame::opt_total() const {
  return (n_ - 1.0) * (n_ - 1.0) * c_ * c_;
}

// ---------------------------------------------------------------------------
// Traffic

Eigen::MatrixXd TrafficNetwork::congestion() const {
  Eigen::Matrix3d M;
  M << F, 0, F, 0, G, G, F, G, F + G;
  const int r = routes();
  return M.topLeftCorner(r, r);
}

Eigen::VectorXd TrafficNetwork::constants() const {
  Eigen::Vector3d b(C, D, E);
  return b.head(routes());
}

bool TrafficNetwork::shortcut_dominant() const {
  return E < std::min(C - kDrivers * G, D - kDrivers * F);
}

std::string TrafficNetwork::to_record() const {
  std::ostringstream os;
  os << "C=" << C << ",D=" << D << ",E=" << E << ",F=" << F << ",G=" << G
     << ",shortcut=" << (shortcut ? 1 : 0) << ",seed=" << seed;
  return os.str();
}

TrafficNetwork TrafficNetwork::from_record(const std::string& record) {
  TrafficNetwork net;
  std::istringstream is(record);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("traffic record: bad field '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (key == "C") net.C = std::stoi(val);
    else if (key == "D") net.D = std::stoi(val);
    else if (key == "E") net.E = std::stoi(val);
    else if (key == "F") net.F = std::stoi(val);
    else if (key == "G") net.G = std::stoi(val);
    else if (key == "shortcut") net.shortcut = std::stoi(val) != 0;
    else if (key == "seed") net.seed = std::stoull(val);
    else throw std::invalid_argument("traffic record: unknown key " + key);
  }
  return net;
}

Eigen::VectorXd traffic_expected_commutes(const Eigen::MatrixXd& P,
                                          const TrafficNetwork& net) {
  const int R = net.routes();
  if (P.rows() != kDrivers || P.cols() != R)
    throw std::invalid_argument("traffic: P must be 4 x routes");
  if (P.minCoeff() < 0.0)
    throw std::invalid_argument("traffic: negative route probability");
  const Eigen::MatrixXd M = net.congestion();
  const Eigen::VectorXd b = net.constants();
  const Eigen::VectorXd total = P.colwise().sum().transpose();
  Eigen::VectorXd out(kDrivers);
  for (int i = 0; i < kDrivers; ++i) {
    const Eigen::VectorXd others = total - P.row(i).transpose();
    out(i) = P.row(i).dot(M.diagonal() + M * others + b);
  }
  return out;
}

Eigen::VectorXd traffic_pure_commutes(const std::vector<int>& routes,
                                      const TrafficNetwork& net) {
  const int R = net.routes();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(R);
  for (int r : routes) {
    if (r < 0 || r >= R) throw std::invalid_argument("traffic: bad route");
    load(r) += 1.0;
  }
  const Eigen::MatrixXd M = net.congestion();
  const Eigen::VectorXd b = net.constants();
  Eigen::VectorXd out(routes.size());
  for (size_t i = 0; i < routes.size(); ++i)
    out(i) = M.row(routes[i]).dot(load) + b(routes[i]);
  return out;
}

double traffic_opt_total(const TrafficNetwork& net) {
  const int R = net.routes();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> prof(kDrivers, 0);
  int count = 1;
  for (int i = 0; i < kDrivers; ++i) count *= R;
  for (int code = 0; code < count; ++code) {
    int c = code;
    for (int i = 0; i < kDrivers; ++i) {
      prof[i] = c % R;
      c /= R;
    }
    best = std::min(best, traffic_pure_commutes(prof, net).sum());
  }
  return best;
}

double braess_two_route_opt(int C, int D, int F, int G) {
  double best = std::numeric_limits<double>::infinity();
  for (int n_sa = 1; n_sa <= 3; ++n_sa) {
    const int n_be = kDrivers - n_sa;
    best = std::min(best, static_cast<double>(n_sa * (F * n_sa + C) +
                                              n_be * (G * n_be + D)));
  }
  return best;
}

TrafficGame::TrafficGame(TrafficNetwork net)
    : Game(uniform_blocks(kDrivers, net.routes()), Domain::kSimplexLogits),
      net_(net),
      opt_(traffic_opt_total(net)) {}

Eigen::MatrixXd TrafficGame::probabilities(const Eigen::VectorXd& x) const {
  const int R = net_.routes();
  Eigen::MatrixXd P(kDrivers, R);
  for (int i = 0; i < kDrivers; ++i)
    P.row(i) = softmax(x.segment(block(i).offset, R)).transpose();
  return P;
}

Eigen::VectorXd TrafficGame::losses(const Eigen::VectorXd& x) const {
  return traffic_expected_commutes(probabilities(x), net_);
}

Eigen::MatrixXd TrafficGame::jacobian(const Eigen::VectorXd& x) const {
  const int R = net_.routes();
  const Eigen::MatrixXd P = probabilities(x);
  const Eigen::MatrixXd M = net_.congestion();
  const Eigen::VectorXd b = net_.constants();
  const Eigen::VectorXd total = P.colwise().sum().transpose();
  Eigen::MatrixXd J(kDrivers, dim());
  for (int i = 0; i < kDrivers; ++i) {
    for (int k = 0; k < kDrivers; ++k) {
      Eigen::VectorXd dp;  // d f_i / d p_k
      if (k == i) {
        dp = M.diagonal() + M * (total - P.row(i).transpose()) + b;
      } else {
        dp = M.transpose() * P.row(i).transpose();
      }
      const Eigen::VectorXd pk = P.row(k).transpose();
      const Eigen::MatrixXd S =
          Eigen::MatrixXd(pk.asDiagonal()) - pk * pk.transpose();
      J.block(i, block(k).offset, 1, R) = (S * dp).transpose();
    }
  }
  return J;
}

std::optional<double> TrafficGame::nash_total() const {
  if (!net_.shortcut || !net_.shortcut_dominant()) return std::nullopt;
  return kDrivers * (kDrivers * (net_.F + net_.G) + double(net_.E));
}

// ---------------------------------------------------------------------------
// Bilinear

BilinearGame::BilinearGame(double a, double b, double c, double d)
    : Game(uniform_blocks(2, 2), Domain::kSimplexLogits) {
  C_ << a, b, c, d;
}

Eigen::Vector2d BilinearGame::first_action_probs(
    const Eigen::VectorXd& x) const {
  return Eigen::Vector2d(softmax(x.segment(0, 2))(0),
                         softmax(x.segment(2, 2))(0));
}

Eigen::VectorXd BilinearGame::losses(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd p1 = softmax(x.segment(0, 2));
  const Eigen::VectorXd p2 = softmax(x.segment(2, 2));
  const double half = 0.5 * p1.dot(C_ * p2);
  return Eigen::Vector2d(half, half);
}

Eigen::MatrixXd BilinearGame::jacobian(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd p1 = softmax(x.segment(0, 2));
  const Eigen::VectorXd p2 = softmax(x.segment(2, 2));
  const Eigen::MatrixXd S1 =
      Eigen::MatrixXd(p1.asDiagonal()) - p1 * p1.transpose();
  const Eigen::MatrixXd S2 =
      Eigen::MatrixXd(p2.asDiagonal()) - p2 * p2.transpose();
  Eigen::RowVectorXd g(4);
  g.head(2) = 0.5 * (S1 * (C_ * p2)).transpose();
  g.tail(2) = 0.5 * (S2 * (C_.transpose() * p1)).transpose();
  Eigen::MatrixXd J(2, 4);
  J.row(0) = g;
  J.row(1) = g;
  return J;
}

Eigen::VectorXd bilinear_logits(double p, double q) {
  Eigen::VectorXd x(4);
  x << std::log(p), std::log1p(-p), std::log(q), std::log1p(-q);
  return x;
}

double bilinear_basin_fraction(double a, double b, double c, double d,
                               int trials, std::mt19937_64& rng, double dt,
                               int steps) {
  if (trials <= 0) throw std::invalid_argument("basin: trials must be > 0");
  const BilinearGame game(a, b, c, d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    double p = unif(rng), q = unif(rng);
    // Keep the logits finite.
    p = std::clamp(p, 1e-9, 1.0 - 1e-9);
    q = std::clamp(q, 1e-9, 1.0 - 1e-9);
    Eigen::VectorXd x = bilinear_logits(p, q);
    for (int s = 0; s < steps; ++s) {
      // Both players descend the shared total p1^T C p2.
      x -= dt * 2.0 * game.jacobian(x).row(0).transpose();
    }
    const Eigen::Vector2d pq = game.first_action_probs(x);
    if (pq(0) > 0.5 && pq(1) < 0.5) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

// ---------------------------------------------------------------------------
// Election

Eigen::Matrix4d election_default_z(double kappa_z) {
  Eigen::Matrix4d Z = Eigen::Matrix4d::Zero();
  Z.topRightCorner<2, 2>().setConstant(kappa_z);
  Z.bottomLeftCorner<2, 2>().setConstant(-kappa_z);
  return Z;
}

ElectionGame::ElectionGame(double w_pd, const Eigen::Matrix4d& Z, double c)
    : Game(uniform_blocks(4, 2)), w_pd_(w_pd), c_(c), Z_(Z) {
  if (!(w_pd > 0.0)) throw std::invalid_argument("election: w_pd <= 0");
  if (!(Z + Z.transpose()).isZero(0.0))
    throw std::invalid_argument("election: Z must be antisymmetric");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (party(i) == party(j) && Z(i, j) != 0.0)
        throw std::invalid_argument("election: Z must be cross-party");
}

namespace {

Eigen::Vector4d efforts(const Eigen::VectorXd& x) {
  Eigen::Vector4d y;
  for (int i = 0; i < 4; ++i) y(i) = x(ElectionGame::effort(i));
  return y;
}

}  // namespace

Eigen::VectorXd ElectionGame::inter_party(const Eigen::VectorXd& x) const {
  const Eigen::Vector4d y = efforts(x);
  return y.cwiseProduct(Z_ * y);
}

Eigen::VectorXd ElectionGame::losses(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("election: bad x size");
  Eigen::VectorXd f = inter_party(x);
  for (int i = 0; i < 4; ++i) {
    const double own = x(stance(i));
    const double mate_gap = x(stance(mate(i))) - c_;
    const double y = x(effort(i));
    f(i) += w_pd_ * (own * own + mate_gap * mate_gap) + y * y;
  }
  return f;
}

Eigen::MatrixXd ElectionGame::jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("election: bad x size");
  const Eigen::Vector4d y = efforts(x);
  const Eigen::Vector4d zy = Z_ * y;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, dim());
  for (int i = 0; i < 4; ++i) {
    J(i, stance(i)) = 2.0 * w_pd_ * x(stance(i));
    J(i, stance(mate(i))) = 2.0 * w_pd_ * (x(stance(mate(i))) - c_);
    // d/dy_k [y_i (Z y)_i] = delta_ik (Z y)_i + y_i Z_ik
    for (int k = 0; k < 4; ++k) J(i, effort(k)) = y(i) * Z_(i, k);
    J(i, effort(i)) += zy(i) + 2.0 * y(i);
  }
  return J;
}

std::vector<Eigen::MatrixXd> ElectionGame::hessians() const {
  std::vector<Eigen::MatrixXd> H(4, Eigen::MatrixXd::Zero(dim(), dim()));
  for (int j = 0; j < 4; ++j) {
    H[j](stance(j), stance(j)) = 2.0 * w_pd_;
    H[j](stance(mate(j)), stance(mate(j))) = 2.0 * w_pd_;
    H[j](effort(j), effort(j)) = 2.0;
    for (int k = 0; k < 4; ++k) {
      H[j](effort(j), effort(k)) += Z_(j, k);
      H[j](effort(k), effort(j)) += Z_(j, k);
    }
  }
  return H;
}

ElectionGame election_build(double w_pd, const Eigen::Matrix4d& Z) {
  return ElectionGame(w_pd, Z);
}

Eigen::MatrixXd mixed_game_jacobian(const std::vector<Eigen::MatrixXd>& H,
                                    const Eigen::MatrixXd& A) {
  return mixed_game_jacobian(H, A,
                             uniform_blocks(static_cast<int>(H.size()), 1));
}

Eigen::MatrixXd mixed_game_jacobian(const std::vector<Eigen::MatrixXd>& H,
                                    const Eigen::MatrixXd& A,
                                    const std::vector<Block>& blocks) {
  const int n = static_cast<int>(H.size());
  if (A.rows() != n || A.cols() != n || static_cast<int>(blocks.size()) != n)
    throw std::invalid_argument("mixed_game_jacobian: dimension mismatch");
  const Eigen::Index d = H.empty() ? 0 : H[0].rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Block& b = blocks[i];
    for (int j = 0; j < n; ++j)
      J.middleRows(b.offset, b.size) += A(j, i) * H[j].middleRows(b.offset, b.size);
  }
  return J;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd fd_jacobian(const Game& game, const Eigen::VectorXd& x,
                            double h) {
  Eigen::MatrixXd J(game.num_players(), game.dim());
  for (int k = 0; k < game.dim(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    J.col(k) = (game.losses(xp) - game.losses(xm)) / (2.0 * h);
  }
  return J;
}

}  // namespace d3c
