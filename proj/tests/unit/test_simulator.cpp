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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "selftrig/errors.hpp"
#include "selftrig/io.hpp"
#include "selftrig/simulator.hpp"
#include "test_support.hpp"

namespace selftrig {
namespace {

using testing::integrator;
using testing::integrator_weights;
using testing::range_set;
using testing::scalar;
using testing::vec;

Scenario single_loop(double x0, int T, double alpha = 0.2) {
  Scenario scn;
  scn.name = "integrator";
  scn.loops.push_back({"integrator", integrator(), integrator_weights(alpha),
                       InitialState{vec({x0}), 0.0}, 0.0});
  scn.I0 = range_set(1, 5);
  scn.p = 5;
  scn.horizon = T;
  return scn;
}

Scenario noisy_loop(int T) {
  Scenario scn;
  scn.loops.push_back({"noisy", LtiSystem(scalar(1), scalar(1), scalar(1)),
                       WeightSpec(scalar(1), scalar(0.1), 0.5), InitialState{std::nullopt, 25.0},
                       0.1});
  scn.I0 = range_set(1, 5);
  scn.p = 5;
  scn.horizon = T;
  scn.seed = 99;
  return scn;
}

SimTrace run(const Scenario& scn, std::optional<RunKey> key = std::nullopt) {
  const auto tables = synthesize_tables(scn);
  return run_self_triggered(scn, tables, key);
}

void expect_well_formed(const LoopTrace& t, int gamma, TimeStep T) {
  ASSERT_EQ(t.states.rows(), T + 1);
  ASSERT_EQ(t.inputs.rows(), T);
  ASSERT_FALSE(t.samples.empty());
  EXPECT_EQ(t.samples.front().k, 0);
  for (std::size_t j = 0; j < t.samples.size(); ++j) {
    const auto& s = t.samples[j];
    EXPECT_GE(s.wait, 1);
    EXPECT_LE(s.wait, gamma);
    if (j + 1 < t.samples.size()) EXPECT_EQ(t.samples[j + 1].k, s.k + s.wait);
    for (TimeStep k = s.k + 1; k < std::min<TimeStep>(s.k + s.wait, T); ++k) {
      EXPECT_EQ(t.inputs.row(k), t.inputs.row(s.k)) << "k=" << k;
    }
  }
}

TEST(StepPlant, Examples) {
  EXPECT_DOUBLE_EQ(step_plant(integrator(), vec({2}), vec({-1.4}), vec({0}))(0), 2 - 1.4);
  EXPECT_EQ(step_plant(integrator(), vec({0}), vec({0}), vec({0}))(0), 0.0);
  const LtiSystem noisy(scalar(1), scalar(1), scalar(1));
  EXPECT_DOUBLE_EQ(step_plant(noisy, vec({1}), vec({0}), vec({0.3}))(0), 1.3);
  EXPECT_THROW(step_plant(integrator(), vec({1, 2}), vec({0}), vec({0})), ConfigError);
}

TEST(SelfTriggered, SingleIntegratorTransient) {
  const Scenario scn = single_loop(2.0, 60);
  const SimTrace tr = run(scn);
  ASSERT_EQ(tr.loops.size(), 1u);
  const LoopTrace& t = tr.loops[0];
  expect_well_formed(t, 5, 60);
  EXPECT_EQ(t.samples.front().wait, 1);
  EXPECT_EQ(t.samples.back().wait, 5);
  for (std::size_t j = 1; j < t.samples.size(); ++j) {
    EXPECT_GE(t.samples[j].wait, t.samples[j - 1].wait);
  }
  for (std::size_t j = 2; j < t.samples.size(); ++j) {
    EXPECT_LE(t.samples[j].value, t.samples[j - 1].value);
  }
  EXPECT_NEAR(t.samples.back().value, 0.04, 1e-6);
  EXPECT_LT(std::abs(t.states(60, 0)), 1e-3);
  const double interval = average_sampling_interval(t, 5);
  EXPECT_GT(interval, 1.0);
  EXPECT_LT(interval, 5.0);
  // Single loop: every sample after k = 0 is a transmission.
  EXPECT_EQ(tr.tx_log.size(), t.samples.size() - 1);
}

TEST(SelfTriggered, ZeroState) {
  const Scenario scn = single_loop(0.0, 30);
  const SimTrace tr = run(scn);
  const LoopTrace& t = tr.loops[0];
  for (const auto& s : t.samples) EXPECT_EQ(s.wait, 5);
  EXPECT_TRUE(t.inputs.isZero(0.0));
  EXPECT_TRUE(t.states.isZero(0.0));
  EXPECT_EQ(empiric_cost(t, scalar(1), scalar(1)), 0.0);
}

TEST(SelfTriggered, LyapunovDecreaseDoubleIntegrator) {
  Scenario scn;
  scn.loops.push_back({"di", testing::double_integrator(), testing::double_integrator_weights(1.0),
                       InitialState{vec({3, -2}), 0.0}, 0.0});
  scn.I0 = range_set(1, 5);
  scn.p = 5;
  scn.horizon = 200;
  const SimTrace tr = run(scn);
  const auto& s = tr.loops[0].samples;
  for (std::size_t j = 2; j < s.size(); ++j) EXPECT_LE(s[j].value, s[j - 1].value + 1e-12);
  EXPECT_EQ(s.back().wait, 5);
  EXPECT_NEAR(s.back().value, 1.0 / 5, 1e-6);
}

TEST(SelfTriggered, TwoLoopSchedule) {
  const Scenario two = load_scenario(testing::scenario_path("two_loop.json")).scenario;
  const Scenario one = load_scenario(testing::scenario_path("integrator.json")).scenario;
  const SimTrace a = run(two);
  const SimTrace b = run(one);
  EXPECT_EQ(a.loops[0].samples.front().feasible, range_set(1, 5));
  EXPECT_EQ(a.loops[0].samples.front().wait, 1);
  EXPECT_EQ(a.loops[1].samples.front().feasible, range_set(2, 5));
  EXPECT_EQ(a.loops[1].samples.front().wait, 2);
  EXPECT_EQ(a.loops[0].states, b.loops[0].states);
  EXPECT_EQ(a.loops[0].inputs, b.loops[0].inputs);
  EXPECT_EQ(a.loops[0].samples.back().wait, 5);
  EXPECT_EQ(a.loops[1].samples.back().wait, 5);
  EXPECT_TRUE(verify_conflict_free(a.transmissions()));
  expect_well_formed(a.loops[1], 5, two.horizon);
}

TEST(SelfTriggered, ManyLoopsNoisyStayConflictFree) {
  Scenario scn;
  for (int l = 0; l < 4; ++l) {
    scn.loops.push_back({"l" + std::to_string(l), LtiSystem(scalar(1), scalar(1), scalar(1)),
                         WeightSpec(scalar(1), scalar(0.1), 0.3 * l), InitialState{std::nullopt, 25},
                         0.1});
  }
  scn.I0 = range_set(1, 6);
  scn.p = 4;
  scn.horizon = 3000;
  scn.seed = 5;
  const SimTrace tr = run(scn);
  EXPECT_TRUE(verify_conflict_free(tr.transmissions()));
  for (const auto& t : tr.loops) expect_well_formed(t, 6, 3000);
}

TEST(SelfTriggered, TableMismatchIsConfigError) {
  const Scenario scn = single_loop(1.0, 10);
  auto tables = synthesize_tables(scn);
  tables[0].alpha = 0.3;
  EXPECT_THROW(run_self_triggered(scn, tables), ConfigError);
  tables = synthesize_tables(single_loop(1.0, 10, 0.2));
  tables[0].I0 = {1, 2, 3, 4};
  tables[0].entries.erase(5);
  EXPECT_THROW(run_self_triggered(scn, tables), ConfigError);
  EXPECT_THROW(run_self_triggered(scn, std::vector<GainTable>{}), ConfigError);
}

TEST(Determinism, SameKeySameTrace) {
  const Scenario scn = noisy_loop(500);
  const SimTrace a = run(scn, RunKey{7, 1, 3});
  const SimTrace b = run(scn, RunKey{7, 1, 3});
  const SimTrace c = run(scn, RunKey{7, 1, 4});
  EXPECT_EQ(a.loops[0].states, b.loops[0].states);
  EXPECT_EQ(a.loops[0].inputs, b.loops[0].inputs);
  EXPECT_NE(a.loops[0].states, c.loops[0].states);
}

TEST(Noise, MomentsMatchVariance) {
  Scenario scn = noisy_loop(1);
  scn.loops[0].x0 = InitialState{std::nullopt, 4.0};
  double sum = 0, sq = 0;
  const int N = 20000;
  for (int r = 0; r < N; ++r) {
    const double x0 = run(scn, RunKey{1, 0, static_cast<std::uint64_t>(r)}).loops[0].states(0, 0);
    sum += x0;
    sq += x0 * x0;
  }
  EXPECT_NEAR(sum / N, 0.0, 0.05);
  EXPECT_NEAR(sq / N, 4.0, 0.15);
}

TEST(Periodic, SamplesEveryTs) {
  const Scenario scn = single_loop(2.0, 60);
  const SimTrace tr = run_periodic(scn, 5);
  const auto times = tr.loops[0].sample_times();
  for (std::size_t j = 0; j < times.size(); ++j) EXPECT_EQ(times[j], static_cast<TimeStep>(5 * j));
  expect_well_formed(tr.loops[0], 5, 60);
}

TEST(Periodic, TsOneIsClassicalLqr) {
  const Scenario scn = single_loop(2.0, 30);
  const SimTrace tr = run_periodic(scn, 1);
  // Scalar DARE with A = B = Q = R = 1: P = golden ratio, L = P / (1 + P).
  const double P = (1 + std::sqrt(5.0)) / 2;
  const double L = P / (1 + P);
  double x = 2.0;
  for (int k = 0; k <= 30; ++k) {
    EXPECT_NEAR(tr.loops[0].states(k, 0), x, 1e-12);
    x *= 1 - L;
  }
}

TEST(Periodic, SlowBaselineHasWorseTransient) {
  const Scenario scn = single_loop(2.0, 60);
  const SimTrace st = run(scn);
  const SimTrace pe = run_periodic(scn, 5);
  const auto& a = st.loops[0].stage_costs;
  const auto& b = pe.loops[0].stage_costs;
  // Both start from x = 2; the self-triggered law spends more input at k = 0
  // and is cheaper at every step of the transient after that.
  for (std::size_t k = 1; k <= 10; ++k) EXPECT_GT(b[k], a[k]) << k;
  EXPECT_GT(*std::max_element(b.begin() + 1, b.end()), *std::max_element(a.begin() + 1, a.end()));
  EXPECT_GT(empiric_cost(pe.loops[0], scalar(1), scalar(1)),
            empiric_cost(st.loops[0], scalar(1), scalar(1)));
}

TEST(Periodic, ZeroStateAndErrors) {
  const Scenario scn = single_loop(0.0, 20);
  EXPECT_TRUE(run_periodic(scn, 3).loops[0].states.isZero(0.0));
  EXPECT_THROW(run_periodic(scn, 0), ConfigError);
  EXPECT_THROW(run_periodic(scn, 6), ConfigError);
}

TEST(Periodic, MultiLoopPhaseOffsets) {
  const Scenario two = load_scenario(testing::scenario_path("two_loop.json")).scenario;
  const SimTrace tr = run_periodic(two, 3);
  EXPECT_EQ(tr.loops[0].sample_times().front(), 0);
  const auto t1 = tr.loops[1].sample_times();
  ASSERT_GE(t1.size(), 3u);
  EXPECT_EQ(t1[0], 0);
  EXPECT_EQ(t1[1], 1);
  EXPECT_EQ(t1[2], 4);
  EXPECT_TRUE(verify_conflict_free(tr.transmissions()));
  EXPECT_THROW(run_periodic(two, 1), ConfigError);
}

TEST(Periodic, BaselineEquivalence) {
  for (int Ts : {1, 3, 5}) {
    Scenario base = noisy_loop(400);
    Scenario restricted = base;
    restricted.I0 = {Ts};
    restricted.p = Ts;
    const RunKey key{11, 2, 0};
    const SimTrace a = run(restricted, key);
    const SimTrace b = run_periodic(base, Ts, key);
    EXPECT_EQ(a.loops[0].states, b.loops[0].states) << Ts;
    EXPECT_EQ(a.loops[0].inputs, b.loops[0].inputs) << Ts;
    EXPECT_EQ(a.loops[0].sample_times(), b.loops[0].sample_times()) << Ts;
  }
}

TEST(EmpiricCost, Examples) {
  LoopTrace t;
  t.states = Matrix::Zero(2, 1);
  t.states(0, 0) = 2;
  t.inputs = Matrix::Constant(1, 1, -1.4);
  EXPECT_NEAR(empiric_cost(t, scalar(1), scalar(0.1)), 4.196, 1e-12);
  t.states.setZero();
  t.inputs.setZero();
  EXPECT_EQ(empiric_cost(t, scalar(1), scalar(0.1)), 0.0);
}

TEST(EmpiricCost, MatchesPerStepLog) {
  const Scenario scn = single_loop(2.0, 60);
  const SimTrace tr = run(scn);
  const auto& t = tr.loops[0];
  ASSERT_EQ(t.stage_costs.size(), 60u);
  double total = 0;
  for (int k = 0; k < 60; ++k) {
    const double x = t.states(k, 0), u = t.inputs(k, 0);
    EXPECT_NEAR(t.stage_costs[static_cast<std::size_t>(k)], x * x + u * u, 1e-15);
    total += x * x + u * u;
  }
  const double c = empiric_cost(t, scalar(1), scalar(1));
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_NEAR(c, total / 60, 1e-12);
}

TEST(AverageInterval, Examples) {
  LoopTrace t;
  for (TimeStep k : {0, 1, 3, 8}) t.samples.push_back({k, 1, 0.0, {}});
  EXPECT_DOUBLE_EQ(average_sampling_interval(t, 5), 8.0 / 3);
  LoopTrace one;
  one.samples.push_back({0, 5, 0.0, {}});
  EXPECT_EQ(average_sampling_interval(one, 5), 5.0);
  const SimTrace zero = run(single_loop(0.0, 50));
  EXPECT_EQ(average_sampling_interval(zero.loops[0], 5), 5.0);
}

TEST(Sweep, ReproducibleAcrossThreadCounts) {
  Scenario scn = noisy_loop(300);
  const std::vector<double> alphas{0.0, 0.5, 5.0};
  SweepOptions one;
  one.threads = 1;
  SweepOptions many;
  many.threads = 4;
  const auto a = sweep_alpha(scn, alphas, 6, 123, one);
  const auto b = sweep_alpha(scn, alphas, 6, 123, many);
  ASSERT_EQ(a.self_triggered.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(a.self_triggered[j].loops[0].mean_cost, b.self_triggered[j].loops[0].mean_cost);
    EXPECT_EQ(a.self_triggered[j].loops[0].mean_interval,
              b.self_triggered[j].loops[0].mean_interval);
    EXPECT_EQ(a.self_triggered[j].loops[0].n_runs, 6);
  }
  ASSERT_EQ(a.periodic.size(), 5u);
  EXPECT_EQ(a.periodic.front().Ts, 1);
  EXPECT_NEAR(a.periodic.back().loops[0].mean_interval, 5.0, 1e-12);
  // Dropping an alpha leaves the others untouched.
  const std::vector<double> fewer{0.5};
  const auto c = sweep_alpha(scn, fewer, 6, 123, one);
  EXPECT_EQ(c.self_triggered[0].loops[0].mean_cost, a.self_triggered[1].loops[0].mean_cost);
}

TEST(Sweep, RejectsBadAlphas) {
  const Scenario scn = noisy_loop(10);
  EXPECT_THROW(sweep_alpha(scn, std::vector<double>{1.0, 0.5}, 2, 1), ConfigError);
  EXPECT_THROW(sweep_alpha(scn, std::vector<double>{-1.0}, 2, 1), ConfigError);
  EXPECT_THROW(sweep_alpha(scn, std::vector<double>{}, 2, 1), ConfigError);
}

TEST(PairwiseSum, MatchesNaiveOnSmallInput) {
  std::vector<double> v;
  for (int j = 1; j <= 1000; ++j) v.push_back(1.0 / j);
  double naive = 0;
  for (double x : v) naive += x;
  EXPECT_NEAR(pairwise_sum(v), naive, 1e-12);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

}  // namespace
}  // namespace selftrig
