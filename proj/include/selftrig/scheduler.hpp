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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace selftrig {

using TimeStep = std::int64_t;

/// One use of the shared channel.
struct Transmission {
  TimeStep k = 0;
  std::size_t loop = 0;
};

/// Witness for an excluded wait: i = next_tx(q) - k + r * p.
struct Exclusion {
  std::size_t other_loop = 0;
  TimeStep r = 0;
};

struct FeasibleSet {
  std::vector<int> waits;
  std::map<int, Exclusion> excluded;
};

/**
 * Next-transmission reservations of every sensor on the shared channel.
 *
 * Loops share the terminal period p and factor set I0. With more than one
 * loop the network must satisfy {1..s} in I0 and s <= p, otherwise the
 * constructor throws ConfigError. The ledger only stores each sensor's next
 * slot; the periodic tail of every reservation is implied by p.
 */
class ReservationLedger {
 public:
  ReservationLedger(int p, std::vector<int> I0, std::size_t num_loops);

  int p() const { return p_; }
  const std::vector<int>& I0() const { return I0_; }
  int gamma() const { return I0_.back(); }
  std::size_t num_loops() const { return next_tx_.size(); }
  std::optional<TimeStep> next_tx(std::size_t loop) const;

  /// Waits in I0 that do not land on another loop's reserved residue class
  /// modulo p. `k` must be the loop's own reserved slot, or any time before
  /// the loop made its first reservation.
  std::vector<int> feasible_set(std::size_t loop, TimeStep k) const;
  FeasibleSet feasible_set_with_witnesses(std::size_t loop, TimeStep k) const;

  /// Books slot k + i for `loop`. Throws SchedulingError on collision.
  void reserve(std::size_t loop, TimeStep k, int i);

 private:
  void check_loop(std::size_t loop) const;

  int p_;
  std::vector<int> I0_;
  std::vector<std::optional<TimeStep>> next_tx_;
};

/// True iff no two transmissions share a time step.
bool verify_conflict_free(std::span<const Transmission> log);

/// Another sensor's reservation pattern with its own period.
struct PeriodicReservation {
  TimeStep next_tx = 0;
  int period = 1;
};

/**
 * Feasible waits for heterogeneous periods: excludes every i with
 * i = next_tx(q) - k + n * p_q - m * p_own for some n, m >= 0. Audit routine
 * only; non-emptiness is not guaranteed.
 */
std::vector<int> heterogeneous_feasible_set(
    TimeStep k, int own_period, const std::vector<int>& I0,
    std::span<const PeriodicReservation> others);

}  // namespace selftrig
