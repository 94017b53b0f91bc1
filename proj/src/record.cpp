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

#include "d3c/record.hpp"

#include <charconv>
#include <cmath>

namespace d3c {

double mean_attention(const Eigen::MatrixXd& A, int i) {
  const Eigen::Index n = A.cols();
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != i) s += std::log(A(i, i) / A(i, j));
  return s / static_cast<double>(n - 1);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kCsvHeader << '\n';
  for (const RunRecord& rec : records) {
    for (const RecordRow& row : rec.rows) {
      const Eigen::Index n = row.value.size();
      for (Eigen::Index i = 0; i < n; ++i) {
        os << rec.run_id << ',' << row.step << ',' << i << ','
           << format_double(row.value(i)) << ','
           << format_double(row.rho.size() ? row.rho(i) : kNaN) << ','
           << format_double(row.rho_max) << ',' << format_double(row.ratio)
           << ',';
        if (row.A.size()) {
          os << format_double(mean_attention(row.A, static_cast<int>(i)))
             << ',';
          for (Eigen::Index j = 0; j < row.A.cols(); ++j) {
            if (j) os << ' ';
            os << format_double(row.A(i, j));
          }
        } else {
          os << "nan,";
        }
        os << '\n';
      }
    }
  }
}

}  // namespace d3c
