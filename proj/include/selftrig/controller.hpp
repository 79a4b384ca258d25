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

#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "selftrig/synthesis.hpp"

namespace selftrig {

/// Result of one self-triggered decision: how long to wait and what to apply.
struct Decision {
  int i_star = 1;
  Vector u;
  double value = 0.0;
  std::map<int, double> values_by_i;
};

/// alpha / i + x' P^(i) x.
double value_of(const GainTable& gt, const Vector& x, int i);

/// Minimizes value_of over the feasible waits. Ties go to the larger wait.
/// Throws SchedulingError on an empty set and LookupError for waits missing
/// from the table.
Decision decide(const GainTable& gt, const Vector& x, std::span<const int> feasible);

/// Unrestricted argmin over I0 at each grid point of a scalar-state table.
std::vector<std::pair<double, int>> partition_1d(const GainTable& gt,
                                                 std::span<const double> x_grid);

}  // namespace selftrig
