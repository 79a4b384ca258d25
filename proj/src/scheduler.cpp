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

#include "selftrig/scheduler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "selftrig/errors.hpp"
#include "selftrig/synthesis.hpp"

namespace selftrig {
namespace {

TimeStep floor_div(TimeStep a, TimeStep b) {
  TimeStep q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

TimeStep ceil_div(TimeStep a, TimeStep b) { return -floor_div(-a, b); }

}  // namespace

ReservationLedger::ReservationLedger(int p, std::vector<int> I0,
                                     std::size_t num_loops)
    : p_(p), I0_(normalized_factor_set(std::move(I0))), next_tx_(num_loops) {
  if (num_loops == 0) throw ConfigError("ledger needs at least one loop");
  if (p_ < 1) throw ConfigError("period p must be >= 1");
  if (num_loops > 1) {
    const auto s = static_cast<int>(num_loops);
    if (s > p_) {
      throw ConfigError("channel admissibility violation: " + std::to_string(s) +
                        " loops exceed the period p = " + std::to_string(p_));
    }
    for (int l = 1; l <= s; ++l) {
      if (!std::binary_search(I0_.begin(), I0_.end(), l)) {
        throw ConfigError("channel admissibility violation: I0 must contain 1.." +
                          std::to_string(s) + " but lacks " + std::to_string(l));
      }
    }
  }
}

void ReservationLedger::check_loop(std::size_t loop) const {
  if (loop >= next_tx_.size()) {
    throw ConfigError("unknown loop index " + std::to_string(loop));
  }
}

std::optional<TimeStep> ReservationLedger::next_tx(std::size_t loop) const {
  check_loop(loop);
  return next_tx_[loop];
}

FeasibleSet ReservationLedger::feasible_set_with_witnesses(std::size_t loop,
                                                           TimeStep k) const {
  check_loop(loop);
  if (next_tx_[loop] && *next_tx_[loop] != k) {
    throw SchedulingError("loop " + std::to_string(loop) + " queried at k = " +
                          std::to_string(k) + " but holds slot " +
                          std::to_string(*next_tx_[loop]));
  }
  FeasibleSet fs;
  const TimeStep max_wait = gamma();
  for (std::size_t q = 0; q < next_tx_.size(); ++q) {
    if (q == loop || !next_tx_[q]) continue;
    const TimeStep d = *next_tx_[q] - k;
    // r such that 1 <= d + r p <= gamma.
    for (TimeStep r = ceil_div(1 - d, p_); d + r * p_ <= max_wait; ++r) {
      fs.excluded.emplace(static_cast<int>(d + r * p_), Exclusion{q, r});
    }
  }
  for (const int i : I0_) {
    if (!fs.excluded.count(i)) fs.waits.push_back(i);
  }
  // Exclusions outside I0 carry no information.
  std::erase_if(fs.excluded, [&](const auto& kv) {
    return !std::binary_search(I0_.begin(), I0_.end(), kv.first);
  });
  if (fs.waits.empty()) {
    throw SchedulingError("empty feasible set for loop " + std::to_string(loop) +
                          " at k = " + std::to_string(k));
  }
  return fs;
}

std::vector<int> ReservationLedger::feasible_set(std::size_t loop, TimeStep k) const {
  return feasible_set_with_witnesses(loop, k).waits;
}

void ReservationLedger::reserve(std::size_t loop, TimeStep k, int i) {
  check_loop(loop);
  if (i < 1) throw SchedulingError("wait must be >= 1");
  const TimeStep slot = k + i;
  for (std::size_t q = 0; q < next_tx_.size(); ++q) {
    if (q == loop || !next_tx_[q]) continue;
    const TimeStep diff = slot - *next_tx_[q];
    if (diff % p_ == 0) {
      throw SchedulingError("slot " + std::to_string(slot) + " for loop " +
                            std::to_string(loop) + " collides with loop " +
                            std::to_string(q) + " reservations");
    }
  }
  next_tx_[loop] = slot;
}

bool verify_conflict_free(std::span<const Transmission> log) {
  std::vector<TimeStep> times;
  times.reserve(log.size());
  for (const auto& t : log) times.push_back(t.k);
  std::sort(times.begin(), times.end());
  return std::adjacent_find(times.begin(), times.end()) == times.end();
}

std::vector<int> heterogeneous_feasible_set(
    TimeStep k, int own_period, const std::vector<int>& I0,
    std::span<const PeriodicReservation> others) {
  if (own_period < 1) throw ConfigError("own period must be >= 1");
  std::vector<int> out;
  for (const int i : normalized_factor_set(I0)) {
    bool blocked = false;
    for (const auto& o : others) {
      if (o.period < 1) throw ConfigError("reservation period must be >= 1");
      // Need n * p_q = i - d + m * p_own with n, m >= 0. The residue of
      // m * p_own mod p_q repeats with period p_q, so p_q consecutive values
      // of m starting at the first admissible one cover every case.
      const TimeStep d = o.next_tx - k;
      const TimeStep m0 = std::max<TimeStep>(0, ceil_div(d - i, own_period));
      for (TimeStep m = m0; m < m0 + o.period && !blocked; ++m) {
        blocked = (i - d + m * own_period) % o.period == 0;
      }
      if (blocked) break;
    }
    if (!blocked) out.push_back(i);
  }
  return out;
}

}  // namespace selftrig
