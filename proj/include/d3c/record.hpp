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

#ifndef D3C_RECORD_HPP_
#define D3C_RECORD_HPP_

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace d3c {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One logged step of one run.
struct RecordRow {
  int step = 0;
  Eigen::VectorXd value;  // per-agent loss (exact) or raw return (bandit)
  Eigen::VectorXd rho;    // per-agent local bound or one-shot estimate
  double rho_max = kNaN;
  double ratio = kNaN;    // ratio to optimal when a closed form exists
  Eigen::MatrixXd A;
};

struct RunRecord {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<RecordRow> rows;
  double max_budget_error = 0.0;  // worst relative budget violation seen
};

// Mean over j != i of ln(A_ii / A_ij).
double mean_attention(const Eigen::MatrixXd& A, int i);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Long format: one line per (run, step, agent).
inline constexpr const char* kCsvHeader =
    "run,step,agent,value,rho,rho_max,ratio,attention,mixing_row";

void emit_csv(std::ostream& os, const std::vector<RunRecord>& records);

}  // namespace d3c

#endif  // D3C_RECORD_HPP_
