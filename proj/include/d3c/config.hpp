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

#ifndef D3C_CONFIG_HPP_
#define D3C_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "d3c/bandit.hpp"
#include "d3c/exact.hpp"
#include "d3c/rl.hpp"

namespace d3c {

// Invalid configuration; path() names the offending key, e.g. "exact.dt".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "pd",       "traffic",  "braess-batch", "game1",
      "game2",    "election", "bilinear",     "trust",
      "coins",    "gradcheck", "reciprocity"};
  return ids;
}

struct ExperimentConfig {
  std::string experiment = "pd";
  std::string algo = "d3c-exact";  // gd-baseline | d3c-exact | d3c-bandit | cooperative
  int runs = 100;
  int steps = 1000;
  std::uint64_t seed = 0;
  int log_every = 0;  // 0 keeps only the first and last step

  ExactConfig exact;
  double exact_a0 = 0.99;
  BanditConfig bandit;
  ReinforceConfig reinforce;

  // Initial strategies for exact games: normal | uniform | fixed.
  std::string init = "normal";
  double init_lo = 0.0;
  double init_hi = 1.0;

  int pd_n = 10;
  double pd_c = 1.0;
  int pd_defectors = 0;  // frozen at the origin with fixed rows

  bool traffic_shortcut = true;
  double braess_delta = 20.0;
  double game1_kappa = 0.5;
  double election_w_pd = 1.0;
  double election_kappa_z = 1.0;
  double bilinear_a = 0.0, bilinear_b = -0.75, bilinear_c = -1.0,
         bilinear_d = 0.0;
  double trust_return_scale = 1.0;  // multiplies returns fed to the bandit
  int reciprocity_permutations = 200;

  bool operator==(const ExperimentConfig&) const;
};

// Paper-scale or tuned defaults for one experiment and algorithm.
ExperimentConfig default_config(const std::string& experiment,
                                const std::string& algo = "");

// Throws ConfigError naming the first bad field.
void validate(const ExperimentConfig& cfg);

// Ordered (key, value) pairs; values use round-trip number formatting.
std::vector<std::pair<std::string, std::string>> config_items(
    const ExperimentConfig& cfg);

// "key = value" lines, '#' comments.
std::string emit_config(const ExperimentConfig& cfg);

// Keys absent from the text keep their defaults for the named experiment.
// Unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);

// Sets one key; used by the parser and by CLI overrides.
void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

}  // namespace d3c

#endif  // D3C_CONFIG_HPP_
