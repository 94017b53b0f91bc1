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

#include "d3c/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "d3c/record.hpp"

namespace d3c {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <typename M>
Field real(std::string key, M member) {
  return {key,
          [member](const ExperimentConfig& c) {
            return format_double(std::invoke(member, c));
          },
          [member, key](ExperimentConfig& c, const std::string& v) {
            std::invoke(member, c) = to_double(key, v);
          }};
}

template <typename T, typename M>
Field integer(std::string key, M member) {
  return {key,
          [member](const ExperimentConfig& c) {
            return std::to_string(std::invoke(member, c));
          },
          [member, key](ExperimentConfig& c, const std::string& v) {
            std::invoke(member, c) = to_int<T>(key, v);
          }};
}

template <typename M>
Field text(std::string key, M member) {
  return {key,
          [member](const ExperimentConfig& c) { return std::invoke(member, c); },
          [member](ExperimentConfig& c, const std::string& v) {
            std::invoke(member, c) = v;
          }};
}

template <typename M>
Field flag(std::string key, M member) {
  return {key,
          [member](const ExperimentConfig& c) {
            return std::string(std::invoke(member, c) ? "true" : "false");
          },
          [member, key](ExperimentConfig& c, const std::string& v) {
            std::invoke(member, c) = to_bool(key, v);
          }};
}

// Nested members need small accessors.
#define D3C_SUB(outer, inner) \
  [](auto& c) -> auto& { return c.outer.inner; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      text("experiment", &ExperimentConfig::experiment),
      text("algo", &ExperimentConfig::algo),
      integer<int>("runs", &ExperimentConfig::runs),
      integer<int>("steps", &ExperimentConfig::steps),
      integer<std::uint64_t>("seed", &ExperimentConfig::seed),
      integer<int>("log_every", &ExperimentConfig::log_every),
      real("exact.dt", D3C_SUB(exact, dt)),
      real("exact.eta_a", D3C_SUB(exact, eta_a)),
      real("exact.nu", D3C_SUB(exact, nu)),
      real("exact.epsilon", D3C_SUB(exact, epsilon)),
      real("exact.l", D3C_SUB(exact, bounds.l)),
      real("exact.h", D3C_SUB(exact, bounds.h)),
      real("exact.a0", &ExperimentConfig::exact_a0),
      real("bandit.eta_a", D3C_SUB(bandit, eta_a)),
      real("bandit.delta", D3C_SUB(bandit, delta)),
      real("bandit.nu", D3C_SUB(bandit, nu)),
      integer<int>("bandit.tau_min", D3C_SUB(bandit, tau_min)),
      integer<int>("bandit.tau_max", D3C_SUB(bandit, tau_max)),
      real("bandit.a0", D3C_SUB(bandit, a0)),
      real("bandit.epsilon", D3C_SUB(bandit, epsilon)),
      real("bandit.l", D3C_SUB(bandit, bounds.l)),
      real("bandit.h", D3C_SUB(bandit, bounds.h)),
      real("reinforce.policy_lr", D3C_SUB(reinforce, policy_lr)),
      integer<int>("reinforce.batch", D3C_SUB(reinforce, batch)),
      real("reinforce.gamma", D3C_SUB(reinforce, gamma)),
      real("reinforce.value_lr", D3C_SUB(reinforce, value_lr)),
      text("init.kind", &ExperimentConfig::init),
      real("init.lo", &ExperimentConfig::init_lo),
      real("init.hi", &ExperimentConfig::init_hi),
      integer<int>("pd.n", &ExperimentConfig::pd_n),
      real("pd.c", &ExperimentConfig::pd_c),
      integer<int>("pd.defectors", &ExperimentConfig::pd_defectors),
      flag("traffic.shortcut", &ExperimentConfig::traffic_shortcut),
      real("braess.delta", &ExperimentConfig::braess_delta),
      real("game1.kappa", &ExperimentConfig::game1_kappa),
      real("election.w_pd", &ExperimentConfig::election_w_pd),
      real("election.kappa_z", &ExperimentConfig::election_kappa_z),
      real("bilinear.a", &ExperimentConfig::bilinear_a),
      real("bilinear.b", &ExperimentConfig::bilinear_b),
      real("bilinear.c", &ExperimentConfig::bilinear_c),
      real("bilinear.d", &ExperimentConfig::bilinear_d),
      real("trust.return_scale", &ExperimentConfig::trust_return_scale),
      integer<int>("reciprocity.permutations",
                   &ExperimentConfig::reciprocity_permutations),
  };
  return f;
}

#undef D3C_SUB

bool is_bandit_experiment(const std::string& e) {
  return e == "trust" || e == "coins";
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  // Compare through the serialized form; format_double is exact.
  return config_items(*this) == config_items(o);
}

ExperimentConfig default_config(const std::string& experiment,
                                const std::string& algo) {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment) == ids.end())
    throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
  ExperimentConfig c;
  c.experiment = experiment;
  c.exact.dt = 0.05;
  c.exact.eta_a = 1.0;
  c.exact.epsilon = 0.01;
  if (experiment == "pd" || experiment == "reciprocity") {
    c.steps = 1000;
    c.exact.eta_a = 0.1;
    if (experiment == "reciprocity") {
      c.pd_n = 3;
      c.runs = 20;
      c.log_every = 1;
    }
  } else if (experiment == "traffic" || experiment == "braess-batch") {
    c.steps = 2000;
  } else if (experiment == "game1") {
    c.steps = 2000;
    c.init = "uniform";
    c.init_lo = 0.0;
    c.init_hi = 1.0;
  } else if (experiment == "game2") {
    c.steps = 2000;
    c.exact.dt = 0.005;
    c.exact.eta_a = 0.3;
    c.exact.epsilon = 0.0;
    c.init = "fixed";
    c.runs = 1;
  } else if (experiment == "election") {
    c.steps = 2000;
    c.exact.eta_a = 0.1;
  } else if (experiment == "bilinear") {
    c.algo = "cooperative";
    c.runs = 1000;
    c.steps = 5000;
    c.exact.dt = 0.2;
    c.init = "uniform";
  } else if (experiment == "trust") {
    c.algo = "d3c-bandit";
    c.steps = 2000;
    c.bandit = BanditConfig::trust_your_brother();
    c.reinforce = ReinforceConfig{};
  } else if (experiment == "coins") {
    c.algo = "d3c-bandit";
    c.runs = 10;
    c.steps = 1000;
    c.bandit = BanditConfig::coins();
    c.reinforce = coins_reinforce_defaults();
  } else if (experiment == "gradcheck") {
    c.runs = 1;
    c.steps = 50;
  }
  if (!algo.empty()) c.algo = algo;
  return c;
}

void validate(const ExperimentConfig& c) {
  default_config(c.experiment);  // throws on unknown id
  static const std::vector<std::string> algos = {"gd-baseline", "d3c-exact",
                                                 "d3c-bandit", "cooperative"};
  if (std::find(algos.begin(), algos.end(), c.algo) == algos.end())
    throw ConfigError("algo", "unknown algorithm '" + c.algo + "'");
  const bool bandit = is_bandit_experiment(c.experiment);
  if (bandit && c.algo == "d3c-exact")
    throw ConfigError("algo", "d3c-exact needs gradient feedback");
  if (!bandit && c.algo == "d3c-bandit")
    throw ConfigError("algo", "d3c-bandit is only wired to trust and coins");
  if (c.runs < 1) throw ConfigError("runs", "must be >= 1");
  if (c.steps < 1) throw ConfigError("steps", "must be >= 1");
  if (c.log_every < 0) throw ConfigError("log_every", "must be >= 0");
  if (!(c.exact.dt > 0.0)) throw ConfigError("exact.dt", "must be > 0");
  if (!(c.exact.eta_a >= 0.0)) throw ConfigError("exact.eta_a", "must be >= 0");
  if (!(c.exact.nu >= 0.0)) throw ConfigError("exact.nu", "must be >= 0");
  if (!std::isfinite(c.exact.epsilon))
    throw ConfigError("exact.epsilon", "must be finite");
  if (!(c.exact.bounds.l < c.exact.bounds.h))
    throw ConfigError("exact.l", "must be < exact.h");
  if (!(c.exact_a0 < 1.0) || !(c.exact_a0 > 0.0))
    throw ConfigError("exact.a0", "must be in (0, 1)");
  if (!(c.bandit.eta_a >= 0.0))
    throw ConfigError("bandit.eta_a", "must be >= 0");
  if (!(c.bandit.delta > 0.0)) throw ConfigError("bandit.delta", "must be > 0");
  if (!(c.bandit.nu >= 0.0)) throw ConfigError("bandit.nu", "must be >= 0");
  if (c.bandit.tau_min < 1)
    throw ConfigError("bandit.tau_min", "must be >= 1");
  if (c.bandit.tau_max < c.bandit.tau_min)
    throw ConfigError("bandit.tau_max", "must be >= bandit.tau_min");
  if (!(c.bandit.a0 < 1.0) || !(c.bandit.a0 > 0.0))
    throw ConfigError("bandit.a0", "must be in (0, 1)");
  if (!(c.bandit.bounds.l < c.bandit.bounds.h))
    throw ConfigError("bandit.l", "must be < bandit.h");
  if (!(c.reinforce.policy_lr > 0.0))
    throw ConfigError("reinforce.policy_lr", "must be > 0");
  if (c.reinforce.batch < 1)
    throw ConfigError("reinforce.batch", "must be >= 1");
  if (!(c.reinforce.gamma >= 0.0) || !(c.reinforce.gamma <= 1.0))
    throw ConfigError("reinforce.gamma", "must be in [0, 1]");
  if (!(c.reinforce.value_lr >= 0.0))
    throw ConfigError("reinforce.value_lr", "must be >= 0");
  if (c.init != "normal" && c.init != "uniform" && c.init != "fixed")
    throw ConfigError("init.kind", "expected normal, uniform or fixed");
  if (c.init == "uniform" && !(c.init_lo < c.init_hi))
    throw ConfigError("init.lo", "must be < init.hi");
  if (c.pd_n < 2) throw ConfigError("pd.n", "must be >= 2");
  if (!(c.pd_c > 0.0)) throw ConfigError("pd.c", "must be > 0");
  if (c.pd_defectors < 0 || c.pd_defectors >= c.pd_n - 1)
    throw ConfigError("pd.defectors", "must be in [0, pd.n - 2]");
  if (!(c.braess_delta >= 0.0))
    throw ConfigError("braess.delta", "must be >= 0");
  if (!(c.game1_kappa > 0.0) || !(c.game1_kappa < 1.0))
    throw ConfigError("game1.kappa", "must be in (0, 1)");
  if (!(c.election_w_pd > 0.0))
    throw ConfigError("election.w_pd", "must be > 0");
  if (!std::isfinite(c.election_kappa_z))
    throw ConfigError("election.kappa_z", "must be finite");
  if (!(c.trust_return_scale > 0.0))
    throw ConfigError("trust.return_scale", "must be > 0");
  if (c.reciprocity_permutations < 1)
    throw ConfigError("reciprocity.permutations", "must be >= 1");
}

std::vector<std::pair<std::string, std::string>> config_items(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : config_items(cfg)) os << k << " = " << v << '\n';
  return os.str();
}

void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> items;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    items.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  std::string experiment = "pd", algo;
  for (const auto& [k, v] : items) {
    if (k == "experiment") experiment = v;
    if (k == "algo") algo = v;
  }
  ExperimentConfig cfg = default_config(experiment, algo);
  for (const auto& [k, v] : items) set_config_value(cfg, k, v);
  validate(cfg);
  return cfg;
}

}  // namespace d3c
