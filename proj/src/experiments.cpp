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

#include "d3c/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "d3c/bandit.hpp"
#include "d3c/exact.hpp"
#include "d3c/games.hpp"
#include "d3c/poa.hpp"
#include "d3c/rl.hpp"

#ifndef D3C_BUILD_VERSION
#define D3C_BUILD_VERSION "unknown"
#endif

namespace d3c {

namespace {

using json = nlohmann::json;

// Decorrelates auxiliary streams (network draws, learners) from the run seed.
constexpr std::uint64_t kStreamSalt = 0x9E3779B97F4A7C15ULL;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd uniform_mixing(int n) {
  return Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

StrategySampler make_sampler(const ExperimentConfig& cfg) {
  if (cfg.init == "uniform") return uniform_sampler(cfg.init_lo, cfg.init_hi);
  return standard_normal_sampler();
}

ExactRunOptions exact_options(const ExperimentConfig& cfg, int n) {
  ExactRunOptions o;
  o.log_every = cfg.log_every;
  o.a0 = cfg.exact_a0;
  if (cfg.algo == "gd-baseline") o.identity_mixing = true;
  if (cfg.algo == "cooperative") o.fixed_mixing = uniform_mixing(n);
  return o;
}

ExactConfig exact_config(const ExperimentConfig& cfg) {
  ExactConfig e = cfg.exact;
  e.steps = cfg.steps;
  return e;
}

RunOutput finish_exact(const Game& game, ExactRunResult r, int run_id) {
  RunOutput out;
  out.record = std::move(r.record);
  out.record.run_id = run_id;
  out.final_x = r.final_state.x;
  out.final_A = r.final_state.A;
  const Eigen::VectorXd f = game.losses(out.final_x);
  out.extras["total"] = f.sum();
  if (const auto opt = game.opt_total()) out.extras["ratio"] = f.sum() / *opt;
  return out;
}

RunOutput run_pd(const ExperimentConfig& cfg, int run_id, std::uint64_t seed) {
  const PDGame game(cfg.pd_n, cfg.pd_c);
  ExactRunOptions o = exact_options(cfg, cfg.pd_n);
  const int m = cfg.pd_defectors;
  if (m > 0) {
    o.frozen.assign(cfg.pd_n, false);
    for (int k = 0; k < m; ++k) o.frozen[k] = true;
    o.init_hook = [&game, m](Eigen::VectorXd& x) {
      for (int k = 0; k < m; ++k)
        x.segment(game.block(k).offset, game.block(k).size).setZero();
    };
  }
  RunOutput out = finish_exact(
      game, run_exact(game, exact_config(cfg), make_sampler(cfg), seed, o),
      run_id);
  const Eigen::VectorXd& x = out.final_x;
  // The total is sum_i |x - C_i|^2, minimised at the column means of C.
  const Eigen::VectorXd opt_x = game.targets().colwise().mean().transpose();
  out.extras["max_abs_x"] = x.cwiseAbs().maxCoeff();
  out.extras["mean_x"] = x.mean();
  out.extras["max_dev_opt_x"] = (x - opt_x).cwiseAbs().maxCoeff();
  if (m > 0) {
    const Eigen::VectorXd f = game.losses(x);
    const double target = pd_maverick_values(cfg.pd_n, m, cfg.pd_c).cooperator_loss;
    double worst = 0.0;
    for (int i = m; i < cfg.pd_n; ++i)
      worst = std::max(worst, std::abs(f(i) - target) / target);
    out.extras["cooperator_max_loss"] = f.tail(cfg.pd_n - m).maxCoeff();
    out.extras["cooperator_max_rel_dev"] = worst;
    out.extras["defector_min_loss"] = f.head(m).minCoeff();
  }
  return out;
}

RunOutput run_traffic_net(const ExperimentConfig& cfg, const TrafficNetwork& net,
                          int run_id, std::uint64_t seed) {
  const TrafficGame game(net);
  RunOutput out = finish_exact(
      game,
      run_exact(game, exact_config(cfg), make_sampler(cfg), seed,
                exact_options(cfg, kDrivers)),
      run_id);
  out.extras["max_commute"] = game.losses(out.final_x).maxCoeff();
  return out;
}

RunOutput run_braess(const ExperimentConfig& cfg, int run_id,
                     std::uint64_t seed) {
  std::mt19937_64 net_rng(seed ^ kStreamSalt);
  TrafficNetwork net = gen_braess(cfg.braess_delta, net_rng);
  net.seed = seed;
  RunOutput out = run_traffic_net(cfg, net, run_id, seed);
  out.extras["net_C"] = net.C;
  out.extras["net_D"] = net.D;
  out.extras["net_E"] = net.E;
  out.extras["net_F"] = net.F;
  out.extras["net_G"] = net.G;
  return out;
}

RunOutput run_game1(const ExperimentConfig& cfg, int run_id,
                    std::uint64_t seed) {
  const NashParadoxGame game(cfg.game1_kappa);
  RunOutput out = finish_exact(
      game,
      run_exact(game, exact_config(cfg), make_sampler(cfg), seed,
                exact_options(cfg, 2)),
      run_id);
  out.extras["max_abs_x"] = out.final_x.cwiseAbs().maxCoeff();
  return out;
}

RunOutput run_game2(const ExperimentConfig& cfg, int run_id,
                    std::uint64_t seed) {
  const UnfairGame game;
  StrategySampler sampler = make_sampler(cfg);
  if (cfg.init == "fixed") {
    sampler = [](const Game&, std::mt19937_64&) {
      Eigen::VectorXd x(2);
      x << 1.0, 0.0;
      return x;
    };
  }
  RunOutput out = finish_exact(
      game,
      run_exact(game, exact_config(cfg), sampler, seed, exact_options(cfg, 2)),
      run_id);
  const Eigen::VectorXd f = game.losses(out.final_x);
  const Eigen::MatrixXd& A = out.final_A;
  out.extras["f1"] = f(0);
  out.extras["f2"] = f(1);
  out.extras["a11_over_a12"] = A(0, 0) / A(0, 1);
  out.extras["a11_over_a21"] = A(0, 0) / A(1, 0);
  return out;
}

RunOutput run_election(const ExperimentConfig& cfg, int run_id,
                       std::uint64_t seed) {
  const ElectionGame game(cfg.election_w_pd,
                          election_default_z(cfg.election_kappa_z));
  RunOutput out = finish_exact(
      game,
      run_exact(game, exact_config(cfg), make_sampler(cfg), seed,
                exact_options(cfg, 4)),
      run_id);
  const Eigen::MatrixXd& A = out.final_A;
  double gap = kInf;  // within-party weight minus the largest cross weight
  for (int i = 0; i < 4; ++i) {
    double cross = -kInf;
    for (int j = 0; j < 4; ++j)
      if (ElectionGame::party(j) != ElectionGame::party(i))
        cross = std::max(cross, A(i, j));
    gap = std::min(gap, std::min(A(i, i), A(i, ElectionGame::mate(i))) - cross);
  }
  const Eigen::MatrixXd J =
      mixed_game_jacobian(game.hessians(), A, game.blocks());
  out.extras["party_gap"] = gap;
  out.extras["max_abs_imag"] = J.eigenvalues().imag().cwiseAbs().maxCoeff();
  return out;
}

RunOutput run_bilinear(const ExperimentConfig& cfg, int run_id,
                       std::uint64_t seed) {
  const BilinearGame game(cfg.bilinear_a, cfg.bilinear_b, cfg.bilinear_c,
                          cfg.bilinear_d);
  // Uniform probability pairs, mapped to logits.
  StrategySampler sampler = [](const Game&, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p = std::clamp(u(rng), 1e-9, 1.0 - 1e-9);
    const double q = std::clamp(u(rng), 1e-9, 1.0 - 1e-9);
    return bilinear_logits(p, q);
  };
  RunOutput out = finish_exact(
      game,
      run_exact(game, exact_config(cfg), sampler, seed, exact_options(cfg, 2)),
      run_id);
  const Eigen::Vector2d pq = game.first_action_probs(out.final_x);
  out.extras["p"] = pq(0);
  out.extras["q"] = pq(1);
  out.extras["hit_10"] = pq(0) > 0.5 && pq(1) < 0.5 ? 1.0 : 0.0;
  return out;
}

RunOutput run_reciprocity(const ExperimentConfig& cfg, int run_id,
                          std::uint64_t seed) {
  ExperimentConfig pd = cfg;
  if (pd.log_every == 0) pd.log_every = 1;
  RunOutput out = run_pd(pd, run_id, seed);
  const auto& rows = out.record.rows;
  const int n = cfg.pd_n;
  if (rows.size() < 4) return out;
  std::mt19937_64 rng(seed ^ kStreamSalt);
  double coeff_sum = 0.0;
  std::vector<double> pvals;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd aij(rows.size()), aji(rows.size());
      for (size_t k = 0; k < rows.size(); ++k) {
        aij(k) = relative_attention(rows[k].A, i, j);
        aji(k) = relative_attention(rows[k].A, j, i);
      }
      coeff_sum += cointegration_coeff(aij, aji);
      pvals.push_back(
          permutation_pvalue(aij, aji, cfg.reciprocity_permutations, rng));
    }
  }
  out.extras["cointegration_mean"] = coeff_sum / pvals.size();
  out.extras["pvalue_harmonic"] = harmonic_mean_p(pvals);
  return out;
}

// Feeds scaled returns to the bandit; the learner itself is unchanged.
class ScaledLearner : public Learner {
 public:
  ScaledLearner(Learner& inner, double scale) : inner_(inner), scale_(scale) {}
  int num_agents() const override { return inner_.num_agents(); }
  Eigen::VectorXd step(const Eigen::MatrixXd& perturbed) override {
    return scale_ * inner_.step(perturbed);
  }
  Eigen::VectorXd raw_returns() const override { return inner_.raw_returns(); }
  double max_budget_error() const override {
    return inner_.max_budget_error();
  }

 private:
  Learner& inner_;
  double scale_;
};

constexpr int kTailWindow = 20;

RunOutput run_rl(const ExperimentConfig& cfg, int run_id, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::unique_ptr<Learner> learner;
  if (cfg.experiment == "trust")
    learner = std::make_unique<TrustLearner>(seed ^ kStreamSalt, cfg.reinforce);
  else
    learner = std::make_unique<CoinsLearner>(seed ^ kStreamSalt, cfg.reinforce);
  ScaledLearner scaled(*learner, cfg.trust_return_scale);
  auto agents = init_bandit_agents(2, cfg.bandit, rng);

  BanditRunOptions o;
  o.log_every = cfg.log_every;
  o.learn_mixing = cfg.algo == "d3c-bandit";
  if (cfg.algo == "cooperative") o.fixed_mixing = uniform_mixing(2);
  const int tail_from = std::max(1, cfg.steps - kTailWindow + 1);
  double tail = 0.0;
  int tail_n = 0;
  o.on_step = [&](int step, const Learner& l) {
    if (step >= tail_from) {
      tail += l.raw_returns().sum();
      ++tail_n;
    }
  };
  RunOutput out;
  out.record = run_bandit(agents, scaled, cfg.bandit, cfg.steps, rng, o);
  out.record.run_id = run_id;
  out.record.seed = seed;
  out.final_A = out.record.rows.back().A;
  out.extras["final_total"] = tail / tail_n;
  out.extras["attention_0"] = relative_attention(out.final_A, 0, 1);
  out.extras["attention_1"] = relative_attention(out.final_A, 1, 0);
  return out;
}

void check_finite(const std::string& where, double v) {
  if (std::isnan(v)) throw std::runtime_error(where + ": NaN result");
}

}  // namespace

Stats summarize(const std::vector<double>& values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values)
    if (!std::isnan(x)) v.push_back(x);
  Stats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / v.size());
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return s;
}

bool ExperimentResult::passed() const {
  for (const GateResult& g : gates)
    if (!g.passed) return false;
  return true;
}

RunOutput run_single(const ExperimentConfig& cfg, int run_id) {
  validate(cfg);
  const std::uint64_t seed = run_seed(cfg.seed, run_id);
  RunOutput out;
  const std::string& e = cfg.experiment;
  if (e == "pd") out = run_pd(cfg, run_id, seed);
  else if (e == "traffic") {
    TrafficNetwork net;
    net.shortcut = cfg.traffic_shortcut;
    out = run_traffic_net(cfg, net, run_id, seed);
  } else if (e == "braess-batch") out = run_braess(cfg, run_id, seed);
  else if (e == "game1") out = run_game1(cfg, run_id, seed);
  else if (e == "game2") out = run_game2(cfg, run_id, seed);
  else if (e == "election") out = run_election(cfg, run_id, seed);
  else if (e == "bilinear") out = run_bilinear(cfg, run_id, seed);
  else if (e == "reciprocity") out = run_reciprocity(cfg, run_id, seed);
  else if (e == "trust" || e == "coins") out = run_rl(cfg, run_id, seed);
  else throw ConfigError("experiment", "'" + e + "' has no per-run form");
  out.record.seed = seed;
  for (const auto& [k, v] : out.extras) check_finite(e + "." + k, v);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  validate(cfg);
  ExperimentResult res;
  res.config = cfg;
  if (cfg.experiment == "gradcheck") {
    res.gates = run_gradcheck(cfg.seed, cfg.steps);
    return res;
  }
  res.runs.resize(cfg.runs);
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.runs);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.runs) return;
      try {
        res.runs[i] = run_single(cfg, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = cfg.runs;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  // Deterministic fold in run order. Every run logs the same steps.
  const size_t logged = res.runs[0].record.rows.size();
  const std::vector<std::string> names = {"total", "ratio", "rho_max",
                                          "attention"};
  for (const auto& name : names) {
    MetricSeries series;
    for (size_t k = 0; k < logged; ++k) {
      std::vector<double> vals;
      for (const RunOutput& r : res.runs) {
        const RecordRow& row = r.record.rows.at(k);
        double v = kNaN;
        if (name == "total") v = row.value.sum();
        else if (name == "ratio") v = row.ratio;
        else if (name == "rho_max") v = row.rho_max;
        else if (row.A.size()) {
          v = 0.0;
          for (Eigen::Index i = 0; i < row.A.rows(); ++i)
            v += mean_attention(row.A, static_cast<int>(i));
          v /= static_cast<double>(row.A.rows());
        }
        vals.push_back(v);
      }
      series.steps.push_back(res.runs[0].record.rows[k].step);
      series.stats.push_back(summarize(vals));
    }
    res.metrics[name] = std::move(series);
  }
  std::map<std::string, std::vector<double>> extras;
  double budget = 0.0;
  for (const RunOutput& r : res.runs) {
    for (const auto& [k, v] : r.extras) extras[k].push_back(v);
    budget = std::max(budget, r.record.max_budget_error);
  }
  for (const auto& [k, v] : extras) res.extras[k] = summarize(v);
  res.gates.push_back(
      {"budget_balance", budget, kBudgetTolerance, budget <= kBudgetTolerance});
  return res;
}

std::vector<GateResult> run_gradcheck(std::uint64_t seed, int points) {
  struct Case {
    std::string name;
    std::unique_ptr<Game> game;
    StrategySampler sampler;
  };
  std::vector<Case> cases;
  cases.push_back({"pd", std::make_unique<PDGame>(3, 1.0),
                   standard_normal_sampler()});
  cases.push_back({"traffic", std::make_unique<TrafficGame>(TrafficNetwork{}),
                   standard_normal_sampler()});
  TrafficNetwork plain;
  plain.shortcut = false;
  cases.push_back({"traffic_no_shortcut", std::make_unique<TrafficGame>(plain),
                   standard_normal_sampler()});
  cases.push_back({"game1", std::make_unique<NashParadoxGame>(0.5),
                   uniform_sampler(0.05, 0.95)});
  cases.push_back({"game2", std::make_unique<UnfairGame>(),
                   standard_normal_sampler()});
  cases.push_back({"election",
                   std::make_unique<ElectionGame>(1.0, election_default_z(1.0)),
                   standard_normal_sampler()});
  cases.push_back({"bilinear",
                   std::make_unique<BilinearGame>(0.0, -0.75, -1.0, 0.0),
                   standard_normal_sampler()});

  constexpr double h = 1e-6;
  auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() /
           std::max(1.0, b.cwiseAbs().maxCoeff());
  };
  std::vector<GateResult> gates;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  for (Case& c : cases) {
    const Game& g = *c.game;
    const int n = g.num_players();
    double jac_worst = 0.0, surr_worst = 0.0;
    for (int p = 0; p < points; ++p) {
      const Eigen::VectorXd x = c.sampler(g, rng);
      jac_worst = std::max(jac_worst, rel(g.jacobian(x), fd_jacobian(g, x, h)));
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = weight(rng);
        A.row(i) /= A.row(i).sum();
      }
      for (int i = 0; i < n; ++i) {
        // A large epsilon keeps the gate open so the full gradient is tested.
        const Eigen::VectorXd ga = grad_a_surrogate(g, x, A, i, 1e6);
        Eigen::VectorXd fd(n);
        for (int m = 0; m < n; ++m) {
          Eigen::MatrixXd Ap = A, Am = A;
          Ap(i, m) += h;
          Am(i, m) -= h;
          fd(m) = (ddt_mixed_loss(g, x, Ap, i) - ddt_mixed_loss(g, x, Am, i)) /
                  (2.0 * h);
        }
        surr_worst = std::max(surr_worst, rel(ga, fd));
      }
    }
    gates.push_back({"jacobian_fd." + c.name, jac_worst, kGradTolerance,
                     jac_worst < kGradTolerance});
    gates.push_back({"grad_a_surrogate_fd." + c.name, surr_worst,
                     kGradTolerance, surr_worst < kGradTolerance});
  }
  return gates;
}

void emit_records_csv(std::ostream& os, const ExperimentResult& result) {
  std::vector<RunRecord> recs;
  recs.reserve(result.runs.size());
  for (const RunOutput& r : result.runs) recs.push_back(r.record);
  emit_csv(os, recs);
}

namespace {

json stats_json(const Stats& s) {
  return json{{"mean", s.mean}, {"median", s.median}, {"std", s.std},
              {"count", s.count}};
}

}  // namespace

void emit_summary(std::ostream& os, const ExperimentResult& result) {
  json j;
  json cfg = json::object();
  for (const auto& [k, v] : config_items(result.config)) cfg[k] = v;
  j["config"] = cfg;
  j["version"] = build_version();
  j["runs_completed"] = result.runs.size();
  json gates = json::array();
  for (const GateResult& g : result.gates)
    gates.push_back({{"name", g.name},
                     {"worst", g.value},
                     {"tolerance", g.tolerance},
                     {"passed", g.passed}});
  j["gates"] = gates;
  j["passed"] = result.passed();
  json metrics = json::object();
  for (const auto& [name, series] : result.metrics) {
    json m;
    m["steps"] = series.steps;
    json mean = json::array(), median = json::array(), sd = json::array();
    for (const Stats& s : series.stats) {
      mean.push_back(s.mean);
      median.push_back(s.median);
      sd.push_back(s.std);
    }
    m["mean"] = mean;
    m["median"] = median;
    m["std"] = sd;
    if (!series.stats.empty()) m["final"] = stats_json(series.stats.back());
    metrics[name] = m;
  }
  j["metrics"] = metrics;
  json extras = json::object();
  for (const auto& [k, s] : result.extras) extras[k] = stats_json(s);
  j["extras"] = extras;
  os << j.dump(2) << '\n';
}

std::string build_version() { return D3C_BUILD_VERSION; }

}  // namespace d3c
