// Copyright 2026 The selftrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "selftrig/controller.hpp"

#include "selftrig/errors.hpp"

namespace selftrig {

double value_of(const GainTable& gt, const Vector& x, int i) {
  const GainEntry& e = gt.at(i);
  if (x.size() != gt.n) {
    throw ConfigError("state has dimension " + std::to_string(x.size()) +
                      ", table expects " + std::to_string(gt.n));
  }
  return gt.alpha / i + x.dot(e.P * x);
}

Decision decide(const GainTable& gt, const Vector& x, std::span<const int> feasible) {
  if (feasible.empty()) {
    throw SchedulingError("empty feasible set" +
                          (gt.loop_id.empty() ? "" : " for loop " + gt.loop_id));
  }
  Decision d;
  bool first = true;
  for (const int i : feasible) {
    const double v = value_of(gt, x, i);
    d.values_by_i[i] = v;
  }
  // values_by_i is ordered by i, so "<=" keeps the largest minimizer.
  for (const auto& [i, v] : d.values_by_i) {
    if (first || v <= d.value) {
      d.value = v;
      d.i_star = i;
      first = false;
    }
  }
  if (x.isZero(0.0)) {
    d.i_star = d.values_by_i.rbegin()->first;
    d.value = d.values_by_i.rbegin()->second;
    d.u = Vector::Zero(gt.m);
    return d;
  }
  d.u = -gt.at(d.i_star).L * x;
  return d;
}

std::vector<std::pair<double, int>> partition_1d(const GainTable& gt,
                                                 std::span<const double> x_grid) {
  if (gt.n != 1) {
    throw ConfigError("state-space partition is only supported for scalar states");
  }
  std::vector<std::pair<double, int>> out;
  out.reserve(x_grid.size());
  Vector x(1);
  for (const double xv : x_grid) {
    x(0) = xv;
    out.emplace_back(xv, decide(gt, x, gt.I0).i_star);
  }
  return out;
}

}  // namespace selftrig
