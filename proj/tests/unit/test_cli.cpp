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


#include <sys/wait.h>

#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include "d3c/config.hpp"
#include "d3c/experiments.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

std::string summary_text(const d3c::ExperimentResult& r) {
  std::ostringstream os;
  d3c::emit_summary(os, r);
  return os.str();
}

std::string csv_text(const d3c::ExperimentResult& r) {
  std::ostringstream os;
  d3c::emit_records_csv(os, r);
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(D3C_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

d3c::ExperimentConfig random_config(std::mt19937_64& rng) {
  const auto& ids = d3c::experiment_ids();
  std::uniform_int_distribution<size_t> pick(0, ids.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 50);
  d3c::ExperimentConfig c = d3c::default_config(ids[pick(rng)]);
  c.runs = small(rng);
  c.steps = small(rng) * 10;
  c.seed = rng();
  c.log_every = small(rng) - 1;
  c.exact.dt = u(rng) + 1e-3;
  c.exact.eta_a = u(rng) * 3.0;
  c.exact.nu = u(rng) * 1e-3;
  c.exact.epsilon = u(rng) / 3.0;
  c.exact_a0 = 0.5 + 0.49 * u(rng);
  c.bandit.delta = u(rng) + 0.01;
  c.bandit.tau_min = small(rng);
  c.bandit.tau_max = c.bandit.tau_min + small(rng);
  c.bandit.epsilon = u(rng) * 100.0;
  c.reinforce.policy_lr = u(rng) * 0.2 + 1e-4;
  c.reinforce.batch = small(rng);
  c.reinforce.gamma = u(rng);
  c.init_lo = -u(rng);
  c.init_hi = u(rng) + 0.1;
  c.pd_n = 2 + small(rng) % 9;
  c.pd_c = 0.1 + u(rng);
  c.traffic_shortcut = u(rng) < 0.5;
  c.braess_delta = 30.0 * u(rng);
  c.game1_kappa = 0.01 + 0.98 * u(rng);
  c.election_kappa_z = u(rng) * 2.0;
  c.bilinear_b = -u(rng);
  c.trust_return_scale = 1e-3 + 100.0 * u(rng);
  c.reciprocity_permutations = small(rng) * 10;
  return c;
}

}  // namespace

TEST_CASE("config round trip over 100 random configs") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const d3c::ExperimentConfig c = random_config(rng);
    REQUIRE_NOTHROW(d3c::validate(c));
    const d3c::ExperimentConfig back = d3c::parse_config(d3c::emit_config(c));
    REQUIRE(back == c);
    REQUIRE(d3c::emit_config(back) == d3c::emit_config(c));
  }
}

TEST_CASE("config parsing") {
  const auto c = d3c::parse_config(
      "# comment\nexperiment = trust\n\nruns = 7  # trailing\n"
      "bandit.tau_min = 3\n");
  CHECK(c.experiment == "trust");
  CHECK(c.algo == "d3c-bandit");
  CHECK(c.runs == 7);
  CHECK(c.bandit.tau_min == 3);
  CHECK(c.bandit.tau_max == 20);  // preset kept

  auto path_of = [](const std::string& text) {
    try {
      d3c::parse_config(text);
    } catch (const d3c::ConfigError& e) {
      return e.path();
    }
    return std::string("none");
  };
  CHECK(path_of("exact.dt = -1") == "exact.dt");
  CHECK(path_of("exact.dt = abc") == "exact.dt");
  CHECK(path_of("bogus = 1") == "bogus");
  CHECK(path_of("experiment = nope") == "experiment");
  CHECK(path_of("runs = 0") == "runs");
  CHECK(path_of("experiment = pd\nalgo = d3c-bandit") == "algo");
  CHECK(path_of("experiment = trust\nbandit.tau_max = 1\nbandit.tau_min = 5") ==
        "bandit.tau_max");
  CHECK(path_of("just words") == "line 1");
  CHECK(path_of("game1.kappa = 1") == "game1.kappa");
}

TEST_CASE("table presets surface through default configs") {
  const auto t = d3c::default_config("trust");
  CHECK(t.algo == "d3c-bandit");
  CHECK(t.bandit.eta_a == 1.0);
  CHECK(t.bandit.delta == 1.0);
  CHECK(t.bandit.a0 == 0.99);
  CHECK(t.bandit.bounds.l == -5.0);
  CHECK(t.bandit.bounds.h == 5.0);
  const auto c = d3c::default_config("coins");
  CHECK(c.bandit.eta_a == 1e-3);
  CHECK(c.bandit.epsilon == 100.0);
  CHECK(c.bandit.tau_min == 5);
  CHECK(c.bandit.tau_max == 10);
  const auto pd = d3c::default_config("pd", "gd-baseline");
  CHECK(pd.algo == "gd-baseline");
  CHECK(pd.pd_n == 10);
  CHECK(pd.exact_a0 == 0.99);
}

TEST_CASE("run_experiment is deterministic across worker counts") {
  d3c::ExperimentConfig c = d3c::default_config("pd");
  c.pd_n = 3;
  c.runs = 6;
  c.steps = 100;
  c.log_every = 10;
  c.seed = 42;
  const auto one = d3c::run_experiment(c, 1);
  const auto four = d3c::run_experiment(c, 4);
  CHECK(csv_text(one) == csv_text(four));
  CHECK(summary_text(one) == summary_text(four));
  CHECK(one.runs[3].record.seed == d3c::run_seed(42, 3));

  c.seed = 43;
  CHECK(csv_text(d3c::run_experiment(c, 2)) != csv_text(one));
}

TEST_CASE("empty result gives a header-only CSV") {
  d3c::ExperimentResult empty;
  const std::string csv = csv_text(empty);
  CHECK(csv == std::string(d3c::kCsvHeader) + "\n");
}

TEST_CASE("CSV schema is stable across experiments") {
  for (const std::string id : {"pd", "game2", "trust"}) {
    d3c::ExperimentConfig c = d3c::default_config(id);
    c.runs = 2;
    c.steps = id == "trust" ? 5 : 20;
    const std::string csv = csv_text(d3c::run_experiment(c, 2));
    CHECK(csv.substr(0, csv.find('\n')) == d3c::kCsvHeader);
  }
}

TEST_CASE("summary echoes every config key and reports the baseline ratio") {
  d3c::ExperimentConfig c = d3c::default_config("pd", "gd-baseline");
  c.runs = 4;
  const auto res = d3c::run_experiment(c);
  const auto j = nlohmann::json::parse(summary_text(res));
  for (const auto& [k, v] : d3c::config_items(c)) {
    REQUIRE(j["config"].contains(k));
    REQUIRE(j["config"][k] == v);
  }
  CHECK(j["version"].get<std::string>() == d3c::build_version());
  CHECK(j["runs_completed"] == 4);
  CHECK(j["passed"] == true);
  const double final_ratio = j["metrics"]["ratio"]["final"]["mean"];
  CHECK(std::abs(final_ratio - 10.0 / 9.0) < 1e-3);
  for (const char* key : {"mean", "median", "std"})
    CHECK(j["metrics"]["total"][key].size() ==
          j["metrics"]["total"]["steps"].size());
}

TEST_CASE("summarize skips NaN") {
  const auto s = d3c::summarize({1.0, d3c::kNaN, 3.0, 2.0});
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.median == doctest::Approx(2.0));
  CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("gradcheck gates pass") {
  for (const auto& g : d3c::run_gradcheck(3, 10)) {
    CAPTURE(g.name);
    CHECK(g.passed);
  }
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("pd --runs 2 --steps 10 --print-config") == 0);
  CHECK(run_cli("pd --n 3 --runs 2 --steps 10") == 0);
  CHECK(run_cli("pd --set exact.dt=-1") == 2);
  CHECK(run_cli("pd --set nosuch=1") == 2);
  CHECK(run_cli("trust --algo d3c-exact") == 2);
  CHECK(run_cli("nosuch") != 0);
  CHECK(run_cli("gradcheck --steps 5") == 0);
}
