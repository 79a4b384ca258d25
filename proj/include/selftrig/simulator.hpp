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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selftrig/controller.hpp"
#include "selftrig/model.hpp"
#include "selftrig/scheduler.hpp"
#include "selftrig/synthesis.hpp"

namespace selftrig {

/// Either a fixed x(0) or a zero-mean Gaussian draw with the given variance
/// per component.
struct InitialState {
  std::optional<Vector> fixed;
  double variance = 0.0;
};

struct LoopSpec {
  std::string id;
  LtiSystem sys;
  WeightSpec weights;
  InitialState x0;
  /// Variance of each disturbance component w(k).
  double noise_variance = 0.0;
};

enum class Mode { kSelfTriggered, kPeriodic };

struct Scenario {
  std::string name;
  std::vector<LoopSpec> loops;
  std::vector<int> I0;
  int p = 1;
  TimeStep horizon = 1;
  std::uint64_t seed = 0;
  Mode mode = Mode::kSelfTriggered;
  /// Sampling period of the periodic baseline when mode is kPeriodic.
  int periodic_ts = 1;

  /// Throws ConfigError when the scenario is malformed.
  void validate() const;
  int gamma() const;
};

/// Random-stream coordinates of one simulation run.
struct RunKey {
  std::uint64_t seed = 0;
  std::uint64_t alpha_tag = 0;
  std::uint64_t run = 0;
};

struct SampleRecord {
  TimeStep k = 0;
  int wait = 1;
  double value = 0.0;
  std::vector<int> feasible;
};

struct LoopTrace {
  std::string id;
  Matrix states;  ///< (T+1) x n, row k holds x(k)
  Matrix inputs;  ///< T x m, row k holds u(k)
  std::vector<SampleRecord> samples;
  std::vector<double> stage_costs;  ///< x(k)'Qx(k) + u(k)'Ru(k), k < T

  std::vector<TimeStep> sample_times() const;
};

/// One channel transmission together with the decision it triggered.
struct TxRecord {
  TimeStep k = 0;
  std::size_t loop = 0;
  int wait = 1;
  std::vector<int> feasible;
};

struct SimTrace {
  std::vector<LoopTrace> loops;
  std::vector<TxRecord> tx_log;

  std::vector<Transmission> transmissions() const;
};

/// x(k+1) = A x + B u + E w.
Vector step_plant(const LtiSystem& sys, const Vector& x, const Vector& u,
                  const Vector& omega);

/// Per-loop gain tables for a scenario, built with the scenario's p.
std::vector<GainTable> synthesize_tables(const Scenario& scn);

/// Throws ConfigError unless every table matches its loop (dimensions, I0,
/// p and alpha).
void check_tables(const Scenario& scn, std::span<const GainTable> tables);

/// Self-triggered closed loop: every loop decides at its own sampling
/// instants; at k = 0 loops decide in index order without using the channel.
SimTrace run_self_triggered(const Scenario& scn, std::span<const GainTable> tables,
                            std::optional<RunKey> key = std::nullopt);

/// Periodic lifted-LQR baseline sampling every Ts steps. Loop l is phase
/// shifted by l steps; its first wait of l steps uses the one-step gain
/// seeded with P^(Ts).
SimTrace run_periodic(const Scenario& scn, int Ts,
                      std::optional<RunKey> key = std::nullopt);

/// Runs whichever controller the scenario's mode selects.
SimTrace run_scenario(const Scenario& scn, std::span<const GainTable> tables,
                      std::optional<RunKey> key = std::nullopt);

/// (1/T) sum_{k<T} x'Qx + u'Ru.
double empiric_cost(const LoopTrace& trace, const Matrix& Q, const Matrix& R);

/// Mean gap between consecutive sampling instants; gamma if fewer than two.
double average_sampling_interval(const LoopTrace& trace, int gamma);

struct LoopStats {
  double mean_interval = 0.0;
  double se_interval = 0.0;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  int n_runs = 0;
};

struct SweepPoint {
  double alpha = 0.0;
  std::vector<LoopStats> loops;
  std::string error;  ///< non-empty when synthesis failed for this alpha
};

struct PeriodicPoint {
  int Ts = 1;
  std::vector<LoopStats> loops;
  std::string error;
};

struct SweepSummary {
  std::vector<std::string> loop_ids;
  std::vector<SweepPoint> self_triggered;
  std::vector<PeriodicPoint> periodic;
};

struct SweepOptions {
  bool include_periodic = true;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Monte-Carlo alpha sweep. Every loop uses the same alpha at each point.
/// Run r at alpha a draws from stream (seed, bits(a), r), so results do not
/// depend on sweep order or thread count.
SweepSummary sweep_alpha(const Scenario& tmpl, std::span<const double> alphas,
                         int n_runs, std::uint64_t seed,
                         const SweepOptions& opts = {});

/// Pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace selftrig
